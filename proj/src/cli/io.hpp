#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mgle/report.hpp"
#include "mgle/volterra.hpp"

namespace mgle::app {

/// A named complex column on the grid of its table.
struct Column {
  std::string name;
  Eigen::VectorXcd values;
};

/// Writes `t` plus a re_/im_ pair per column. Real-only columns are still written as pairs.
void write_csv(const std::filesystem::path& path, const volterra::TimeGrid& grid, const std::vector<Column>& columns);

struct CsvTable {
  std::vector<double> t;
  std::vector<Column> columns;

  const Column& column(const std::string& name) const;
  /// Grid implied by the t column; throws unless it is uniform to 1e-9 relative.
  volterra::TimeGrid grid() const;
};

/// Reads a file written by write_csv (or any CSV with a t column and re_/im_ pairs).
CsvTable read_csv(const std::filesystem::path& path);

struct Environment {
  std::string backend;
  std::uint64_t seed = 0;
  double dt = 0.0;
  double t_max = 0.0;
  std::size_t samples = 0;
  std::string version;
};

void write_report(const std::filesystem::path& dir, const std::vector<CheckResult>& checks, const Environment& env,
                  int exit_code);

/// Exclusive marker file in an output directory, removed on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

std::string version_string();

}  // namespace mgle::app
