#pragma once

#include <cstddef>
#include <functional>

#include "mgle/hilbert.hpp"

namespace mgle::volterra {

/// Uniform grid t_k = t0 + k dt, k = 0..count-1.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t count = 0;

  TimeGrid() = default;
  /// Throws ConstructionError unless dt > 0, count >= 2 and both times are finite.
  TimeGrid(double t0, double dt, std::size_t count);
  /// Grid covering [0, t_max] with step dt (t_max rounded to the nearest multiple of dt).
  static TimeGrid span(double t_max, double dt);

  double node(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
  double t_max() const noexcept { return node(count - 1); }
  /// Index of the node at time t; throws Error if t is not on the grid within 1e-9 dt.
  std::size_t index_of(double t) const;
  bool same_as(const TimeGrid& other) const noexcept;
};

/// Complex samples of a function on a TimeGrid.
struct Series {
  TimeGrid grid;
  Eigen::VectorXcd values;

  Series() = default;
  Series(TimeGrid grid, Eigen::VectorXcd values);
  static Series zeros(const TimeGrid& grid);
  static Series sample(const TimeGrid& grid, const std::function<Complex(double)>& f);

  Complex operator[](std::size_t k) const { return values[static_cast<Eigen::Index>(k)]; }
  Complex& operator[](std::size_t k) { return values[static_cast<Eigen::Index>(k)]; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

/// Lower-triangular two-time array V(t_k, t_j), k >= j, packed row by row.
class TwoTimeField {
 public:
  TwoTimeField() = default;
  explicit TwoTimeField(TimeGrid grid);
  static TwoTimeField sample(const TimeGrid& grid, const std::function<Complex(double, double)>& f);

  const TimeGrid& grid() const noexcept { return grid_; }
  Complex operator()(std::size_t k, std::size_t j) const { return data_[offset(k, j)]; }
  Complex& operator()(std::size_t k, std::size_t j) { return data_[offset(k, j)]; }

 private:
  std::size_t offset(std::size_t k, std::size_t j) const;

  TimeGrid grid_;
  Eigen::VectorXcd data_;
};

enum class Rule { trapezoid, simpson };

/// Weights w_0..w_m (without the dt factor) of a composite rule over m intervals.
///
/// Simpson handles an odd interval count with a 3/8 panel on the last three intervals and falls
/// back to the trapezoid for a single interval.
Eigen::VectorXd quadrature_weights(std::size_t intervals, Rule rule);

/// Solves K(t) = g(t) - int_0^t K(t-s) h(s) ds by trapezoid marching.
Series solve_convolution(const Series& g, const Series& h);

/// Trapezoid evaluation of int_0^t K(t-s) C(s) ds at every node.
Series convolve(const Series& K, const Series& C);

/// Solves K(t_k, s) = -G(t_k, s) + int_s^{t_k} K(t_k, r) H(r, s) dr for s = t_0..t_k.
/// Returns the values indexed by s-node j = 0..k.
Eigen::VectorXcd solve_two_time(const TwoTimeField& G, const TwoTimeField& H, std::size_t k);

}  // namespace mgle::volterra
