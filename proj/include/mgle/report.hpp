#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mgle {

enum class Status { pass, fail, not_applicable };

const char* to_string(Status s) noexcept;

/// Outcome of one verification: the largest deviation found, where, and against what tolerance.
struct CheckResult {
  std::string name;
  Status status = Status::not_applicable;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  std::optional<double> t;
  std::optional<double> s;
  std::string note;

  bool passed() const noexcept { return status == Status::pass; }
};

/// PASS iff every deviation is finite and <= tolerance; records the worst node.
CheckResult judge(std::string name, const std::vector<double>& deviations, const std::vector<double>& times,
                  double tolerance);

CheckResult not_applicable(std::string name, std::string note);

}  // namespace mgle
