#include "cli/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mgle/error.hpp"

#ifndef MGLE_VERSION
#define MGLE_VERSION "0.1.0"
#endif

namespace mgle::app {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

void write_csv(const fs::path& path, const volterra::TimeGrid& grid, const std::vector<Column>& columns) {
  for (const auto& c : columns)
    if (static_cast<std::size_t>(c.values.size()) != grid.count)
      throw DimensionError("csv column " + c.name, grid.count, c.values.size());
  auto out = open_out(path);
  out << 't';
  for (const auto& c : columns) out << ",re_" << c.name << ",im_" << c.name;
  out << '\n';
  for (std::size_t k = 0; k < grid.count; ++k) {
    out << std::fixed << std::setprecision(9) << grid.node(k) << std::defaultfloat << std::setprecision(17);
    for (const auto& c : columns) {
      const Complex v = c.values[static_cast<Eigen::Index>(k)];
      out << ',' << v.real() << ',' << v.imag();
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

const Column& CsvTable::column(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return c;
  throw Error("csv has no column '" + name + "'");
}

volterra::TimeGrid CsvTable::grid() const {
  if (t.size() < 2) throw Error("csv needs at least two rows");
  const double dt = t[1] - t[0];
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs(t[k] - t[0] - static_cast<double>(k) * dt) > 1e-9 * std::max(1.0, std::abs(t[k])))
      throw Error("csv t column is not uniform at row " + std::to_string(k + 2));
  return {t[0], dt, t.size()};
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing input file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty file");
  const auto header = split(line);
  if (header.empty() || header[0] != "t") throw Error(path.string() + ":1: first column must be 't'");

  CsvTable table;
  std::vector<std::pair<int, int>> slots;  // (re column, im column) per complex column
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h.rfind("re_", 0) == 0) {
      const std::string name = h.substr(3);
      int im = -1;
      for (std::size_t d = 1; d < header.size(); ++d)
        if (header[d] == "im_" + name) im = static_cast<int>(d);
      table.columns.push_back({name, {}});
      slots.emplace_back(static_cast<int>(c), im);
    } else if (h.rfind("im_", 0) != 0) {
      table.columns.push_back({h, {}});
      slots.emplace_back(static_cast<int>(c), -1);
    }
  }

  std::vector<std::vector<Complex>> data(slots.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                  " fields, got " + std::to_string(cells.size()));
    table.t.push_back(parse_double(cells[0], path, lineno));
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const double re = parse_double(cells[static_cast<std::size_t>(slots[s].first)], path, lineno);
      const double im =
          slots[s].second < 0 ? 0.0 : parse_double(cells[static_cast<std::size_t>(slots[s].second)], path, lineno);
      data[s].emplace_back(re, im);
    }
  }
  for (std::size_t s = 0; s < slots.size(); ++s)
    table.columns[s].values = Eigen::Map<Eigen::VectorXcd>(data[s].data(), static_cast<Eigen::Index>(data[s].size()));
  return table;
}

void write_report(const fs::path& dir, const std::vector<CheckResult>& checks, const Environment& env, int exit_code) {
  nlohmann::json j;
  j["schema"] = 1;
  j["exit_code"] = exit_code;
  j["environment"] = {{"backend", env.backend}, {"seed", env.seed},     {"dt", env.dt},
                      {"t_max", env.t_max},     {"N", env.samples},     {"version", env.version}};
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json loc = nullptr;
    if (c.t) {
      loc = {{"t", *c.t}};
      if (c.s) loc["s"] = *c.s;
    }
    j["checks"].push_back({{"name", c.name},
                           {"status", to_string(c.status)},
                           {"max_deviation", number(c.max_deviation)},
                           {"tolerance", number(c.tolerance)},
                           {"location", loc},
                           {"note", c.note}});
  }
  {
    auto out = open_out(dir / "report.json");
    out << j.dump(2) << '\n';
  }

  auto out = open_out(dir / "report.txt");
  out << std::setprecision(6);
  out << "backend " << env.backend << "  seed " << env.seed << "  dt " << env.dt << "  t_max " << env.t_max;
  if (env.samples) out << "  N " << env.samples;
  out << "  (" << env.version << ")\n";
  for (const auto& c : checks) {
    char line[256];
    std::snprintf(line, sizeof line, "%-4s  %-20s  dev %-11.3e tol %-11.3e", to_string(c.status), c.name.c_str(),
                  c.max_deviation, c.tolerance);
    out << line;
    if (c.t) out << "  at t=" << *c.t;
    if (c.s) out << " s=" << *c.s;
    if (!c.note.empty()) out << "  " << c.note;
    out << '\n';
  }
  if (checks.empty()) out << "no checks requested\n";
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".mgle.lock") {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) throw Error("output directory is in use (remove " + path_.string() + " if no run is active)");
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

std::string version_string() { return MGLE_VERSION; }

}  // namespace mgle::app
