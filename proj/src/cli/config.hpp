#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgle/error.hpp"
#include "mgle/hilbert.hpp"

namespace mgle::app {

/// Malformed or inconsistent configuration; the message names the field (and line, for syntax errors).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Backend { matrix, trajectory, nonstationary };

const char* to_string(Backend b) noexcept;

struct RunConfig {
  Backend backend = Backend::matrix;
  nlohmann::json system;  ///< backend-specific block, interpreted by the pipeline
  double t_max = 5.0;
  double dt = 1e-2;
  std::size_t samples = 20000;
  std::uint64_t seed = 42;
  std::size_t substeps = 10;
  std::vector<std::string> checks;
  std::filesystem::path output_dir = "mgle-out";
  std::map<std::string, double> tolerances;
  bool zero_memory = false;  ///< negative control: drop K and the memory part of eta before verifying

  std::optional<double> tolerance(const std::string& check) const;
};

/// Checks a backend understands, in report order.
const std::vector<std::string>& known_checks(Backend b);
/// Checks run when the config does not list any.
std::vector<std::string> default_checks(Backend b);

RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig load_config(const std::filesystem::path& path);

/// Re-validates after command-line overrides.
void validate(const RunConfig& cfg);

/// Typed access to a JSON block with the dotted field path kept for diagnostics.
class Field {
 public:
  Field(const nlohmann::json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const nlohmann::json& json() const noexcept { return *j_; }
  const std::string& path() const noexcept { return path_; }
  bool has(const std::string& key) const;
  Field operator[](const std::string& key) const;
  Field operator[](std::size_t i) const;
  std::size_t size() const;

  double number() const;
  double number(const std::string& key, double fallback) const;
  std::uint64_t unsigned_int() const;
  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string() const;
  std::string string(const std::string& key, const std::string& fallback) const;

  /// [re, im] pair or a bare real number.
  Complex complex() const;
  /// Nested rows of [re, im] pairs (or reals).
  Matrix complex_matrix() const;
  Vector complex_vector() const;
  Eigen::MatrixXd real_matrix() const;

  [[noreturn]] void fail(const std::string& what) const;

 private:
  const nlohmann::json* j_;
  std::string path_;
};

}  // namespace mgle::app
