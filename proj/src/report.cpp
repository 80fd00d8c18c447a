#include "mgle/report.hpp"

#include <cmath>

#include "mgle/error.hpp"

namespace mgle {

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::not_applicable: return "N-A";
  }
  return "N-A";
}

CheckResult judge(std::string name, const std::vector<double>& deviations, const std::vector<double>& times,
                  double tolerance) {
  if (deviations.size() != times.size()) throw DimensionError("judge: deviations vs times", deviations.size(), times.size());
  CheckResult r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  bool finite = true;
  for (std::size_t i = 0; i < deviations.size(); ++i) {
    if (!std::isfinite(deviations[i])) {
      finite = false;
      r.max_deviation = deviations[i];
      r.t = times[i];
      break;
    }
    if (i == 0 || deviations[i] > r.max_deviation) {
      r.max_deviation = deviations[i];
      r.t = times[i];
    }
  }
  r.status = finite && r.max_deviation <= tolerance ? Status::pass : Status::fail;
  return r;
}

CheckResult not_applicable(std::string name, std::string note) {
  CheckResult r;
  r.name = std::move(name);
  r.status = Status::not_applicable;
  r.note = std::move(note);
  return r;
}

}  // namespace mgle
