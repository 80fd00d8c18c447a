#pragma once

#include <stdexcept>
#include <string>

namespace mgle {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two objects that must agree in length or shape do not.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
      : Error(what + ": expected length " + std::to_string(expected) + ", got " +
              std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// An invariant of a value type was violated at construction.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// A numerical scheme cannot meet its accuracy contract for the given input.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double bound) : Error(what), bound_(bound) {}
  double bound() const noexcept { return bound_; }

 private:
  double bound_;
};

/// An implicit marching step is (nearly) singular.
class SingularStepError : public Error {
 public:
  SingularStepError(const std::string& what, std::size_t row) : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// A simulated quantity became NaN or infinite.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

}  // namespace mgle
