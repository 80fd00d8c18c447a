// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgle/catalogue.hpp"
#include "mgle/linops.hpp"
#include "mgle/models.hpp"
#include "mgle/mori.hpp"
#include "mgle/nonstationary.hpp"
#include "mgle/orthdyn.hpp"
#include "mgle/parallel.hpp"
#include "mgle/trajectory.hpp"
#include "mgle/volterra.hpp"

using namespace mgle;
namespace fs = std::filesystem;
using hilbert::Space;
using linops::OperatorModel;
using volterra::TimeGrid;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (detail.tellp() > 0) detail << "; ";
    detail << what << (ok ? "" : " [x]");
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string show(const CheckResult& r) { return r.name + " " + fmt(r.max_deviation) + " <= " + fmt(r.tolerance); }

OperatorModel random_model(bool random_weight) {
  return {random_weight ? Space::coordinate(models::random_weight(8, 2)) : Space::coordinate_identity(8),
          models::random_generator(8, 1, 0.2)};
}

Vector random_z() { return models::random_vector(8, 3); }

double kernel_scale(const mori::Series& K) { return std::max(1.0, K.values.cwiseAbs().maxCoeff()); }

Outcome dyson() {
  Outcome o;
  const TimeGrid g = TimeGrid::span(5.0, 0.1);
  for (bool rw : {false, true}) {
    const OperatorModel m = random_model(rw);
    const CheckResult r = orthdyn::check_dyson(m, mori::MoriProjection(m.space(), random_z()), g);
    o.require(r.passed(), std::string(rw ? "random W " : "W = I ") + fmt(r.max_deviation) + " <= " + fmt(r.tolerance));
  }
  return o;
}

Outcome gle_residual() {
  Outcome o;
  const OperatorModel m = random_model(true);
  double prev = 0.0;
  for (double dt : {1e-2, 5e-3}) {
    const mori::MatrixDynamics dyn(m, random_z(), TimeGrid::span(5.0, dt));
    const CheckResult r = mori::verify_gle(dyn, mori::assemble(dyn), 1e-3);
    if (dt == 1e-2) o.require(r.passed(), "dt 1e-2 " + show(r));
    else {
      const double ratio = prev / r.max_deviation;
      o.require(ratio >= 3.0 && ratio <= 5.0, "halving ratio " + fmt(ratio) + " in [3,5]");
    }
    prev = r.max_deviation;
  }
  return o;
}

Outcome fdt_orthogonality() {
  Outcome o;
  const double dt = 1e-3;
  const TimeGrid g = TimeGrid::span(5.0, dt);
  const OperatorModel diss = random_model(true);
  const OperatorModel skew(Space::coordinate_identity(8), models::random_skew_generator(8, 5));
  for (const auto* m : {&diss, &skew}) {
    const bool is_skew = m == &skew;
    const mori::MatrixDynamics dyn(*m, random_z(), g);
    const mori::GleIngredients ing = mori::assemble(dyn);
    const auto& p = dyn.projection();
    const std::string tag = is_skew ? "skew " : "random ";
    const CheckResult f = mori::verify_2fdt(ing, p, p.orthogonal(dyn.adjoint_z()), is_skew, 10 * dt * dt * kernel_scale(ing.K));
    o.require(f.passed(), tag + show(f));
    const double lz = m->space().norm(m->generator() * p.z());
    const CheckResult r = mori::verify_orthogonality(ing.eta, p, 1e-8, lz);
    o.require(r.passed(), tag + show(r));
  }
  return o;
}

Outcome unitary() {
  Outcome o;
  const double dt = 1e-2;
  const TimeGrid g = TimeGrid::span(5.0, dt);
  const OperatorModel m(Space::coordinate_identity(8), models::random_skew_generator(8, 5));
  const mori::MoriProjection p(m.space(), random_z());
  const CheckResult u = orthdyn::check_unitarity(m, p, g, 1e-10);
  o.require(u.passed(), show(u));
  const mori::MatrixDynamics dyn(m, p.z(), g);
  const CheckResult s = orthdyn::check_stationarity(mori::assemble(dyn).eta, m.space(), 10 * dt * dt);
  o.require(s.passed(), show(s));
  return o;
}

Outcome oscillator() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t N = 100000;
  const trajectory::SystemSpec osc = trajectory::catalogue::harmonic_oscillator(2.0, 1.0);
  const TimeGrid g = TimeGrid::span(5.0, 1e-2);
  auto ens = std::make_shared<const trajectory::TrajectoryEnsemble>(
      trajectory::integrate_flow(osc, trajectory::sample_initial(osc, N, 42).states, g, 10, 42));
  const trajectory::EnsembleDynamics dyn(ens, osc);
  const mori::GleIngredients ing = mori::assemble(dyn);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const double kerr = ((ing.K.values.array() + 4.0).abs() / 4.0).maxCoeff();
  o.require(kerr <= 0.02, "K rel " + fmt(kerr) + " <= 0.02");

  const Vector p0 = dyn.evaluate(trajectory::catalogue::coordinate(1, 2));
  const double pmax = p0.cwiseAbs().maxCoeff();
  double eerr = 0.0;
  for (Eigen::Index k = 0; k < ing.eta.frames.cols(); ++k)
    eerr = std::max(eerr, (ing.eta.frames.col(k) - p0).cwiseAbs().maxCoeff() / pmax);
  o.require(eerr <= 1e-3, "eta rel " + fmt(eerr) + " <= 0.001");

  const double zn = dyn.space().norm(dyn.projection().z());
  const double wtol = 5.0 / std::sqrt(double(N)) * dyn.space().norm(dyn.lz_orbit().initial) / zn;
  o.require(std::abs(ing.omega) <= wtol, "|omega| " + fmt(std::abs(ing.omega)) + " <= " + fmt(wtol));
  o.require(secs < 60.0, "runtime " + fmt(secs) + " s < 60");
  return o;
}

Outcome volterra_order() {
  Outcome o;
  std::vector<double> err;
  for (double dt : {1e-1, 5e-2, 2.5e-2}) {
    const TimeGrid g = TimeGrid::span(5.0, dt);
    const auto one = volterra::Series::sample(g, [](double) { return Complex(1.0); });
    const auto K = volterra::solve_convolution(one, one);
    double e = 0.0;
    for (std::size_t k = 0; k < g.count; ++k) e = std::max(e, std::abs(K[k] - std::exp(-g.node(k))));
    err.push_back(e);
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double order = std::log2(err[i - 1] / err[i]);
    o.require(order >= 1.8 && order <= 2.2, "order " + fmt(order) + " in [1.8,2.2]");
  }
  return o;
}

Outcome semigroup_growth() {
  Outcome o;
  const double dt = 1e-2;
  const OperatorModel m = random_model(true);
  const mori::MatrixDynamics dyn(m, random_z(), TimeGrid::span(5.0, dt));
  const orthdyn::OrbitFactory factory = [&](const Vector& x) { return orthdyn::orbit(dyn, x); };
  const auto gb = linops::growth_bound(m, 5.0, 51);
  const double ldz = m.space().norm(dyn.adjoint_z()), zn = m.space().norm(dyn.projection().z());
  double worst_semi = 0.0, worst_growth = 0.0;
  bool semi_ok = true, growth_ok = true;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Vector x = models::random_vector(8, 1000 + i);
    const CheckResult s = orthdyn::check_semigroup(factory, m.space(), x, 0.5, 0.5, 10 * dt * dt * m.space().norm(x));
    semi_ok = semi_ok && s.passed();
    worst_semi = std::max(worst_semi, s.max_deviation / s.tolerance);
    const CheckResult gr = orthdyn::check_growth_bound(factory(x), gb, m.space(), ldz, zn);
    growth_ok = growth_ok && gr.passed();
    worst_growth = std::max(worst_growth, gr.max_deviation);
  }
  o.require(semi_ok, "semigroup worst deviation/tol " + fmt(worst_semi));
  o.require(growth_ok, "growth worst ratio " + fmt(worst_growth) + " <= 1");
  return o;
}

Outcome omega0() {
  Outcome o;
  namespace cat = trajectory::catalogue;
  const trajectory::SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
  const auto X = trajectory::sample_initial(osc, 20000, 7).states;
  const double w = trajectory::estimate_omega0(osc, X).value;
  o.require(w <= 1e-6, "hamiltonian " + fmt(w) + " <= 1e-6");

  const trajectory::SystemSpec logi = cat::logistic_drift();
  const auto wl = trajectory::estimate_omega0(logi, trajectory::sample_initial(logi, 20000, 7).states);
  o.require(wl.value >= 0.45 && wl.value <= 0.5 && !wl.flagged_unbounded,
            "logistic " + fmt(wl.value) + " in [0.45,0.5]" + (wl.flagged_unbounded ? " (no plateau)" : ""));

  const auto ens = trajectory::integrate_flow(osc, X, TimeGrid::span(5.0, 1e-2));
  const CheckResult iso =
      trajectory::check_isometry(ens, osc.z, osc.z, trajectory::isometry_tolerance(ens, osc.z, osc.z));
  o.require(iso.passed(), show(iso));
  return o;
}

Space energy_space() {
  Matrix W = Matrix::Zero(2, 2);
  W(0, 0) = 4.0;
  W(1, 1) = 1.0;
  return Space::coordinate(W);
}

Outcome nsgle() {
  Outcome o;
  using namespace nonstationary;
  Vector z = Vector::Zero(2);
  z[0] = 1.0;
  double prev = 0.0;
  for (double dt : {1e-2, 5e-3}) {
    const TimeGrid g = TimeGrid::span(3.0, dt);
    const Generator gen = models::driven_oscillator(4.0, 1.0);
    auto fam = std::make_shared<const EvolutionFamily>(propagate_family(gen, g, 2));
    const NsProblem prob(gen, fam, energy_space(), z);
    const NsResult res = ns_extract(prob, sample_pairs(g));
    const CheckResult r = verify_nsgle(prob, res, 1e-3);
    if (dt == 1e-2) {
      o.require(r.passed(), show(r));
      const auto fdt = verify_ns_2fdt(prob, res, 1e-6, 1e-3);
      for (const auto& c : fdt) o.require(c.passed(), show(c));
    } else {
      const double ratio = prev / r.max_deviation;
      o.require(ratio >= 3.0 && ratio <= 5.0, "halving ratio " + fmt(ratio) + " in [3,5]");
    }
    prev = r.max_deviation;
  }

  // Autonomous reduction against the stationary pipeline.
  const TimeGrid g = TimeGrid::span(3.0, 1e-2);
  Matrix L(2, 2);
  L << 0, 1, -4, 0;
  const Generator cst = [L](double) { return L; };
  const NsProblem prob(cst, std::make_shared<const EvolutionFamily>(propagate_family(cst, g, 2)), energy_space(), z);
  const auto K = prob.kernel();
  const OperatorModel m(energy_space(), L);
  const mori::MatrixDynamics dyn(m, z, g);
  const mori::GleIngredients ing = mori::assemble(dyn);
  double dk = 0.0;
  for (std::size_t k = 0; k < g.count; ++k)
    for (std::size_t j = 0; j <= k; ++j) dk = std::max(dk, std::abs(K(k, j) - ing.K[k - j]));
  const double tol = 1e-3;
  o.require(dk <= 2 * tol, "autonomous |K - K_auto| " + fmt(dk) + " <= " + fmt(2 * tol));
  const CheckResult rn = verify_nsgle(prob, ns_extract(prob, sample_pairs(g)), 2 * tol);
  o.require(rn.passed(), "autonomous " + show(rn));
  return o;
}

struct Control {
  std::string config;
  std::string check;
};

Outcome negative_controls(const fs::path& mgle, const fs::path& configs, const fs::path& work) {
  Outcome o;
  const std::vector<Control> controls{{"zero_memory", "gle_residual"},
                                      {"nonskew_stationarity", "stationarity"},
                                      {"mismatched_isometry", "isometry"}};
  for (const auto& c : controls) {
    const fs::path out = work / c.config;
    fs::remove_all(out);
    const std::string cmd = "\"" + mgle.string() + "\" run --config \"" + (configs / "negative" / (c.config + ".json")).string() +
                            "\" --out \"" + out.string() + "\" > \"" + (work / (c.config + ".log")).string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    const int code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::string status = "missing";
    std::ifstream in(out / "report.json");
    if (in) {
      const auto j = nlohmann::json::parse(in, nullptr, false);
      if (!j.is_discarded())
        for (const auto& r : j["checks"])
          if (r["name"] == c.check) status = r["status"].get<std::string>();
    }
    o.require(code != 0 && status == "FAIL", c.config + " exit " + std::to_string(code) + ", " + c.check + " " + status);
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance"};
  std::string mgle, configs, work;
  app.add_option("--mgle", mgle, "mgle executable")->required();
  app.add_option("--configs", configs, "configuration directory")->required();
  app.add_option("--work", work, "scratch directory")->required();
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);
  set_threads(std::max(1u, std::thread::hardware_concurrency()));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"dyson identity", dyson},
      {"gle residual", gle_residual},
      {"2fdt and orthogonality", fdt_orthogonality},
      {"unitary case", unitary},
      {"oscillator end-to-end", oscillator},
      {"volterra convergence", volterra_order},
      {"semigroup and growth", semigroup_growth},
      {"omega0 and isometry", omega0},
      {"nsgle", nsgle},
      {"negative controls", [&] { return negative_controls(mgle, configs, work); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "error: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %-24s (%.1fs)  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
