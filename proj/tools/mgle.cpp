#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/io.hpp"
#include "cli/pipeline.hpp"
#include "mgle/parallel.hpp"
#include "mgle/volterra.hpp"

namespace fs = std::filesystem;
using namespace mgle;
using namespace mgle::app;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<std::uint64_t> samples;
  std::optional<unsigned> threads;
  std::vector<std::string> checks;
  std::string trajectory;
  std::string g, h, correlation;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "run configuration (JSON)");
  cmd->add_option("--out", o.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", o.seed, "ensemble seed");
  cmd->add_option("--dt", o.dt, "grid step");
  cmd->add_option("--t-max", o.t_max, "grid horizon");
  cmd->add_option("--samples", o.samples, "ensemble size N");
  cmd->add_option("--threads", o.threads, "worker threads (default: MGLE_THREADS, else all cores)");
  cmd->add_option("--check", o.checks, "check to run; repeatable, replaces the configured list");
}

void apply_threads(const Options& o) {
  unsigned n = 0;
  if (o.threads) {
    n = *o.threads;
  } else if (const char* env = std::getenv("MGLE_THREADS")) {
    try {
      n = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      throw Error(std::string("MGLE_THREADS is not a number: ") + env);
    }
  } else {
    n = std::thread::hardware_concurrency();
  }
  set_threads(std::max(1u, n));
}

RunConfig configure(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.dt) cfg.dt = *o.dt;
  if (o.t_max) cfg.t_max = *o.t_max;
  if (o.samples) cfg.samples = *o.samples;
  if (!o.checks.empty()) cfg.checks = o.checks;
  validate(cfg);
  return cfg;
}

fs::path prepare(const fs::path& dir) {
  fs::create_directories(dir);
  return dir;
}

std::shared_ptr<const trajectory::TrajectoryEnsemble> load_ensemble(const Options& o, const RunConfig& cfg,
                                                                    bool required) {
  fs::path p = o.trajectory.empty() ? cfg.output_dir / "trajectory.bin" : fs::path(o.trajectory);
  if (!fs::exists(p)) {
    if (required || !o.trajectory.empty()) throw Error("missing input file: " + p.string());
    return nullptr;
  }
  auto ens = std::make_shared<const trajectory::TrajectoryEnsemble>(trajectory::TrajectoryEnsemble::load(p.string()));
  if (ens->dim() != build_trajectory(cfg).spec.dim) throw Error(p.string() + ": state dimension does not match the config");
  return ens;
}

int report_run(const RunConfig& cfg, const RunResult& res, bool artifacts) {
  if (artifacts) write_artifacts(cfg.output_dir, res);
  const int code = exit_code(res.checks);
  write_report(cfg.output_dir, res.checks, environment(cfg), code);
  for (const auto& c : res.checks) {
    std::cout << to_string(c.status) << "  " << c.name << "  max_deviation=" << c.max_deviation
              << " tolerance=" << c.tolerance << '\n';
  }
  return code;
}

int cmd_run(const Options& o, bool artifacts, std::optional<Backend> need, std::vector<std::string> forced) {
  RunConfig cfg = configure(o);
  if (need && cfg.backend != *need)
    throw ConfigError(std::string("this command needs backend '") + to_string(*need) + "'");
  if (!forced.empty() && o.checks.empty()) cfg.checks = forced;
  DirectoryLock lock(prepare(cfg.output_dir));
  std::shared_ptr<const trajectory::TrajectoryEnsemble> ens;
  if (cfg.backend == Backend::trajectory) ens = load_ensemble(o, cfg, false);
  return report_run(cfg, execute(cfg, ens), artifacts);
}

int cmd_simulate(const Options& o) {
  RunConfig cfg = configure(o);
  if (cfg.backend != Backend::trajectory) throw ConfigError("simulate needs backend 'trajectory'");
  DirectoryLock lock(prepare(cfg.output_dir));
  const fs::path p = o.trajectory.empty() ? cfg.output_dir / "trajectory.bin" : fs::path(o.trajectory);
  simulate(cfg, build_trajectory(cfg))->save(p.string());
  std::cout << "wrote " << p.string() << '\n';
  return 0;
}

int cmd_correlate(const Options& o) {
  RunConfig cfg = configure(o);
  DirectoryLock lock(prepare(cfg.output_dir));
  mori::GleInputs in;
  if (cfg.backend == Backend::trajectory) {
    in = correlate(build_trajectory(cfg), load_ensemble(o, cfg, true));
  } else if (cfg.backend == Backend::matrix) {
    const auto setup = build_matrix(cfg);
    in = mori::gle_inputs_matrix(setup.model, mori::MoriProjection(setup.model.space(), setup.z), run_grid(cfg));
  } else {
    throw ConfigError("correlate supports the matrix and trajectory backends");
  }
  write_correlation(cfg.output_dir / "correlation.csv", in);
  return 0;
}

int cmd_kernel(const Options& o) {
  volterra::Series g, h;
  fs::path dir;
  if (!o.g.empty() || !o.h.empty()) {
    if (o.g.empty() || o.h.empty()) throw Error("--g and --h go together");
    const auto tg = read_csv(o.g), th = read_csv(o.h);
    if (tg.columns.empty() || th.columns.empty()) throw Error("kernel inputs need a value column");
    auto grid = tg.grid();
    if (!grid.same_as(th.grid())) throw Error(o.g + " and " + o.h + " have different grids");
    if (o.dt && std::abs(*o.dt - grid.dt) > 1e-9 * *o.dt) throw Error("--dt does not match the t column of " + o.g);
    auto pick = [](const CsvTable& t, const char* name) {
      for (const auto& c : t.columns)
        if (c.name == name) return c.values;
      return t.columns.front().values;
    };
    g = volterra::Series(grid, pick(tg, "g"));
    h = volterra::Series(grid, pick(th, "h"));
    dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  } else {
    fs::path src;
    if (!o.correlation.empty()) {
      src = o.correlation;
      dir = o.out.empty() ? src.parent_path() : fs::path(o.out);
    } else {
      const RunConfig cfg = configure(o);
      dir = cfg.output_dir;
      src = dir / "correlation.csv";
    }
    const auto t = read_csv(src);
    g = volterra::Series(t.grid(), t.column("g").values);
    h = volterra::Series(t.grid(), t.column("h").values);
  }
  if (dir.empty()) dir = ".";
  DirectoryLock lock(prepare(dir));
  write_kernel(dir / "kernel.csv", mori::extract_kernel(g, h));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory kernels, fluctuating forces and generalized Langevin checks for linear evolutions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  Options o;
  auto* run = app.add_subcommand("run", "full pipeline: artifacts and verification report");
  auto* verify = app.add_subcommand("verify", "run the configured checks and write the report");
  auto* ns_verify = app.add_subcommand("ns-verify", "checks for a non-stationary (time-dependent) generator");
  auto* dyson = app.add_subcommand("dyson", "orthogonal-dynamics identity on a matrix model");
  auto* sim = app.add_subcommand("simulate", "sample initial states and integrate the flow to trajectory.bin");
  auto* corr = app.add_subcommand("correlate", "correlation.csv (C, g, h, omega) from a trajectory file or matrix model");
  auto* kern = app.add_subcommand("kernel", "solve for the memory kernel from g and h");
  auto* forces = app.add_subcommand("forces", "kernel.csv and forces.csv without verification");
  for (auto* c : {run, verify, ns_verify, dyson, sim, corr, kern, forces}) add_common(c, o);
  for (auto* c : {run, verify, sim, corr, forces})
    c->add_option("--trajectory", o.trajectory, "trajectory file (default: <out>/trajectory.bin)");
  kern->set_help_flag("--help", "Print this help message and exit");
  kern->add_option("--g", o.g, "CSV with the g series");
  kern->add_option("--h", o.h, "CSV with the h series");
  kern->add_option("--correlation", o.correlation, "correlation.csv from `correlate`");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    apply_threads(o);
    if (run->parsed()) return cmd_run(o, true, std::nullopt, {});
    if (verify->parsed()) return cmd_run(o, false, std::nullopt, {});
    if (ns_verify->parsed()) return cmd_run(o, false, Backend::nonstationary, {});
    if (dyson->parsed()) return cmd_run(o, false, Backend::matrix, {"dyson"});
    if (sim->parsed()) return cmd_simulate(o);
    if (corr->parsed()) return cmd_correlate(o);
    if (kern->parsed()) return cmd_kernel(o);
    if (forces->parsed()) {
      Options q = o;
      RunConfig cfg = configure(q);
      cfg.checks.clear();
      DirectoryLock lock(prepare(cfg.output_dir));
      std::shared_ptr<const trajectory::TrajectoryEnsemble> ens;
      if (cfg.backend == Backend::trajectory) ens = load_ensemble(o, cfg, false);
      write_artifacts(cfg.output_dir, execute(cfg, ens));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "mgle: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
