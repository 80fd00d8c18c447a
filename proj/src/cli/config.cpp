#include "cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mgle::app {

namespace {

const std::vector<std::string> kMatrixChecks = {"dyson",      "unitarity", "gle_residual", "fdt2",
                                                "orthogonality", "stationarity", "semigroup", "growth_bound"};
const std::vector<std::string> kTrajectoryChecks = {"gle_residual", "fdt2",   "orthogonality",   "stationarity",
                                                    "isometry",     "omega0", "kernel_reference"};
const std::vector<std::string> kNsChecks = {"composition", "nsgle_residual", "ns_orthogonality", "ns_fdt2",
                                            "force_constancy"};

Backend parse_backend(const Field& f) {
  const std::string s = f.string();
  if (s == "matrix") return Backend::matrix;
  if (s == "trajectory") return Backend::trajectory;
  if (s == "nonstationary") return Backend::nonstationary;
  f.fail("unknown backend '" + s + "' (matrix, trajectory or nonstationary)");
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

const char* to_string(Backend b) noexcept {
  switch (b) {
    case Backend::matrix: return "matrix";
    case Backend::trajectory: return "trajectory";
    case Backend::nonstationary: return "nonstationary";
  }
  return "?";
}

const std::vector<std::string>& known_checks(Backend b) {
  switch (b) {
    case Backend::matrix: return kMatrixChecks;
    case Backend::trajectory: return kTrajectoryChecks;
    case Backend::nonstationary: return kNsChecks;
  }
  return kMatrixChecks;
}

std::vector<std::string> default_checks(Backend b) {
  switch (b) {
    case Backend::matrix: return {"dyson", "gle_residual", "fdt2", "semigroup", "growth_bound"};
    case Backend::trajectory: return {"gle_residual", "fdt2", "orthogonality", "isometry"};
    case Backend::nonstationary: return {"composition", "nsgle_residual", "ns_orthogonality", "ns_fdt2"};
  }
  return {};
}

std::optional<double> RunConfig::tolerance(const std::string& check) const {
  if (auto it = tolerances.find(check); it != tolerances.end()) return it->second;
  return std::nullopt;
}

bool Field::has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

Field Field::operator[](const std::string& key) const {
  if (!j_->is_object()) fail("expected an object");
  auto it = j_->find(key);
  if (it == j_->end()) fail("missing field '" + key + "'");
  return {*it, path_ + "." + key};
}

Field Field::operator[](std::size_t i) const {
  if (!j_->is_array() || i >= j_->size()) fail("expected an array with more than " + std::to_string(i) + " entries");
  return {(*j_)[i], path_ + "[" + std::to_string(i) + "]"};
}

std::size_t Field::size() const {
  if (!j_->is_array()) fail("expected an array");
  return j_->size();
}

double Field::number() const {
  if (!j_->is_number()) fail("expected a number");
  return j_->get<double>();
}

double Field::number(const std::string& key, double fallback) const { return has(key) ? (*this)[key].number() : fallback; }

std::uint64_t Field::unsigned_int() const {
  if (j_->is_number_unsigned()) return j_->get<std::uint64_t>();
  if (j_->is_number_integer() && j_->get<std::int64_t>() >= 0) return j_->get<std::uint64_t>();
  fail("expected a nonnegative integer");
}

std::uint64_t Field::unsigned_int(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? (*this)[key].unsigned_int() : fallback;
}

bool Field::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Field f = (*this)[key];
  if (!f.json().is_boolean()) f.fail("expected true or false");
  return f.json().get<bool>();
}

std::string Field::string() const {
  if (!j_->is_string()) fail("expected a string");
  return j_->get<std::string>();
}

std::string Field::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? (*this)[key].string() : fallback;
}

Complex Field::complex() const {
  if (j_->is_number()) return {j_->get<double>(), 0.0};
  if (j_->is_array() && j_->size() == 2) return {(*this)[0].number(), (*this)[1].number()};
  fail("expected a number or an [re, im] pair");
}

Matrix Field::complex_matrix() const {
  const std::size_t rows = size();
  if (rows == 0) fail("expected a non-empty matrix");
  const std::size_t cols = (*this)[0].size();
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Field row = (*this)[r];
    if (row.size() != cols) row.fail("ragged matrix: expected " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].complex();
  }
  return M;
}

Vector Field::complex_vector() const {
  Vector v(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = (*this)[i].complex();
  return v;
}

Eigen::MatrixXd Field::real_matrix() const {
  const Matrix M = complex_matrix();
  if (M.imag().cwiseAbs().maxCoeff() != 0.0) fail("expected a real matrix");
  return M.real();
}

void Field::fail(const std::string& what) const { throw ConfigError("config field '" + path_ + "': " + what); }

RunConfig parse_config(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON (" +
                      e.what() + ")");
  }
  const Field root(j, "$");
  if (!j.is_object()) root.fail("expected an object");
  if (root.unsigned_int("schema", 0) != 1) root["schema"].fail("only schema 1 is supported");

  RunConfig cfg;
  cfg.backend = parse_backend(root["backend"]);
  cfg.system = root.has("system") ? j["system"] : nlohmann::json::object();
  if (root.has("grid")) {
    const Field g = root["grid"];
    cfg.t_max = g.number("t_max", cfg.t_max);
    cfg.dt = g.number("dt", cfg.dt);
  }
  if (root.has("ensemble")) {
    const Field e = root["ensemble"];
    cfg.samples = e.unsigned_int("N", cfg.samples);
    cfg.seed = e.unsigned_int("seed", cfg.seed);
    cfg.substeps = e.unsigned_int("substeps", cfg.substeps);
  }
  if (root.has("checks")) {
    const Field c = root["checks"];
    for (std::size_t i = 0; i < c.size(); ++i) cfg.checks.push_back(c[i].string());
  } else {
    cfg.checks = default_checks(cfg.backend);
  }
  cfg.output_dir = root.string("output_dir", cfg.output_dir.string());
  if (root.has("tolerances")) {
    const Field t = root["tolerances"];
    if (!t.json().is_object()) t.fail("expected an object of check name to number");
    for (const auto& [name, _] : t.json().items()) {
      const double v = t[name].number();
      if (!(v >= 0.0)) t[name].fail("tolerance must be nonnegative");
      cfg.tolerances[name] = v;
    }
  }
  if (root.has("controls")) cfg.zero_memory = root["controls"].boolean("zero_memory", false);

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void validate(const RunConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.t_max > 0.0)) throw ConfigError("grid: t_max and dt must be positive");
  if (cfg.t_max / cfg.dt > 1e6) throw ConfigError("grid: t_max/dt exceeds 1e6 nodes");
  if (cfg.t_max / cfg.dt < 1.0) throw ConfigError("grid: t_max must cover at least one step");
  if (cfg.backend == Backend::trajectory) {
    if (cfg.samples < 2) throw ConfigError("ensemble.N must be at least 2");
    if (cfg.substeps < 1) throw ConfigError("ensemble.substeps must be at least 1");
  }
  const auto& known = known_checks(cfg.backend);
  for (const auto& c : cfg.checks)
    if (std::find(known.begin(), known.end(), c) == known.end())
      throw ConfigError("unknown check '" + c + "' for the " + std::string(to_string(cfg.backend)) + " backend");
  for (std::size_t a = 0; a < cfg.checks.size(); ++a)
    for (std::size_t b = a + 1; b < cfg.checks.size(); ++b)
      if (cfg.checks[a] == cfg.checks[b]) throw ConfigError("check '" + cfg.checks[a] + "' listed twice");
}

}  // namespace mgle::app
