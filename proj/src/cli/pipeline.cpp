#include "cli/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "mgle/catalogue.hpp"
#include "mgle/models.hpp"
#include "mgle/orthdyn.hpp"

namespace mgle::app {

namespace tj = trajectory;
namespace ns = nonstationary;
using volterra::Series;
using volterra::TimeGrid;

namespace {

double tol_or(const RunConfig& cfg, const std::string& name, double fallback) {
  return cfg.tolerance(name).value_or(fallback);
}

/// Report order follows the order checks were requested in.
void order_like(const RunConfig& cfg, std::vector<CheckResult>& checks) {
  auto pos = [&cfg](const std::string& n) { return std::find(cfg.checks.begin(), cfg.checks.end(), n) - cfg.checks.begin(); };
  std::stable_sort(checks.begin(), checks.end(),
                   [&pos](const CheckResult& a, const CheckResult& b) { return pos(a.name) < pos(b.name); });
}

/// Worst of several results of the same check, each normalized to its own tolerance.
CheckResult worst_of(std::string name, const std::vector<CheckResult>& parts) {
  CheckResult out;
  out.name = std::move(name);
  out.status = Status::pass;
  double worst = -1.0;
  for (const auto& r : parts) {
    const double ratio = r.tolerance > 0.0 ? r.max_deviation / r.tolerance : r.max_deviation;
    if (!std::isfinite(r.max_deviation) || ratio > worst) {
      worst = std::isfinite(r.max_deviation) ? ratio : INFINITY;
      out.max_deviation = r.max_deviation;
      out.tolerance = r.tolerance;
      out.t = r.t;
      out.s = r.s;
    }
    if (r.status == Status::fail) out.status = Status::fail;
  }
  out.note = std::to_string(parts.size()) + " cases";
  return out;
}

Matrix matrix_block(const Field& f, std::size_t n, const char* what, const std::function<Matrix(std::uint64_t)>& random) {
  if (f.json().is_object()) {
    if (f.has("random")) return random(f["random"].unsigned_int("seed", 1));
    f.fail(std::string("expected a matrix or {\"random\": {...}} for ") + what);
  }
  Matrix M = f.complex_matrix();
  if (static_cast<std::size_t>(M.rows()) != n || static_cast<std::size_t>(M.cols()) != n)
    f.fail(std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  return M;
}

Vector vector_block(const Field& f, std::size_t n) {
  if (f.json().is_object()) {
    if (f.has("random")) return models::random_vector(n, f["random"].unsigned_int("seed", 1));
    f.fail("expected a vector or {\"random\": {...}}");
  }
  Vector v = f.complex_vector();
  if (static_cast<std::size_t>(v.size()) != n) f.fail("expected " + std::to_string(n) + " entries");
  return v;
}

hilbert::Space weight_block(const Field& sys, std::size_t n) {
  if (!sys.has("weight")) return hilbert::Space::coordinate_identity(n);
  const Field w = sys["weight"];
  if (w.json().is_string()) {
    if (w.string() == "identity") return hilbert::Space::coordinate_identity(n);
    w.fail("expected \"identity\", a matrix or {\"random\": {...}}");
  }
  const Matrix W = matrix_block(w, n, "weight", [n](std::uint64_t s) { return models::random_weight(n, s); });
  try {
    return hilbert::Space::coordinate(W);
  } catch (const ConstructionError& e) {
    w.fail(e.what());
  }
}

tj::ObservableSpec observable(const Field& f, std::size_t dim) {
  const std::string kind = f.string("kind", "coordinate");
  if (kind == "coordinate") {
    const auto i = f.unsigned_int("index", 0);
    if (i >= dim) f["index"].fail("index out of range");
    return tj::catalogue::coordinate(i, dim);
  }
  if (kind == "momentum") {
    if (dim != 2) f.fail("momentum is defined for two-dimensional (q, p) systems");
    return tj::catalogue::coordinate(1, dim);
  }
  if (kind == "monomial") {
    const Field e = f["exponents"];
    if (e.size() != dim) e.fail("expected one exponent per coordinate");
    std::vector<unsigned> ex;
    for (std::size_t i = 0; i < dim; ++i) ex.push_back(static_cast<unsigned>(e[i].unsigned_int()));
    try {
      return tj::catalogue::monomial(ex);
    } catch (const Error& err) {
      e.fail(err.what());
    }
  }
  if (kind == "product") {
    const Field fs = f["factors"];
    if (fs.size() != 2) fs.fail("expected two factors");
    return tj::catalogue::product(observable(fs[0], dim), observable(fs[1], dim), dim);
  }
  f["kind"].fail("unknown observable kind '" + kind + "' (coordinate, momentum, monomial, product)");
}

std::vector<Vector> probe_vectors(const hilbert::Space& space, std::uint64_t seed, std::size_t count) {
  std::vector<Vector> xs;
  for (std::size_t i = 0; i < count; ++i) {
    Vector x = models::random_vector(space.dim(), seed * 7919 + 101 + i);
    xs.push_back(x / space.norm(x));
  }
  return xs;
}

void zero_memory(mori::GleIngredients& ing) {
  ing.K.values.setZero();
  ing.eta.frames.setZero();
}

double kernel_scale(const Series& K) { return std::max(1.0, K.values.cwiseAbs().maxCoeff()); }

/// 5 sigma of the ensemble 2FDT deviation, sigma from the per-sample terms of the linearized ratio
/// estimator. Reversal pairs are not independent, so they count once.
double fdt_mc_tolerance(const mori::Dynamics& dyn, const mori::GleIngredients& ing, bool skew, bool paired) {
  const auto& p = dyn.projection();
  const Vector& z = p.z();
  const Vector a = p.orthogonal(dyn.adjoint_z());
  const Matrix& E = ing.eta.frames;
  const auto N = E.rows();
  const Eigen::ArrayXd z2 = z.cwiseAbs2().array();
  double sigma = 0.0;
  for (Eigen::Index k = 0; k < E.cols(); ++k) {
    const Complex K = ing.K.values[k];
    auto spread = [&](const Eigen::ArrayXcd& d) {
      const Complex mean = d.mean();
      return std::sqrt((d - mean).abs2().sum() / static_cast<double>(std::max<Eigen::Index>(N - 1, 1)));
    };
    sigma = std::max(sigma, spread(E.col(k).array() * a.conjugate().array() - K * z2) / p.zz());
    if (skew) sigma = std::max(sigma, spread(-E.col(k).array() * E.col(0).conjugate().array() - K * z2) / p.zz());
  }
  const double n_eff = static_cast<double>(N) / (paired ? 2.0 : 1.0);
  return 5.0 * sigma / std::sqrt(n_eff);
}

void gle_checks(const RunConfig& cfg, const mori::Dynamics& dyn, const mori::GleIngredients& ing, bool skew,
                double fdt_tol, double orth_tol, double stat_tol, RunResult& out) {
  const auto& p = dyn.projection();
  for (const auto& name : cfg.checks) {
    if (name == "gle_residual") {
      out.checks.push_back(mori::verify_gle(dyn, ing, tol_or(cfg, name, 1e-3)));
    } else if (name == "fdt2") {
      out.checks.push_back(mori::verify_2fdt(ing, p, p.orthogonal(dyn.adjoint_z()), skew, tol_or(cfg, name, fdt_tol)));
    } else if (name == "orthogonality") {
      out.checks.push_back(
          mori::verify_orthogonality(ing.eta, p, tol_or(cfg, name, orth_tol), dyn.space().norm(dyn.lz_orbit().initial)));
    } else if (name == "stationarity") {
      out.checks.push_back(orthdyn::check_stationarity(ing.eta, dyn.space(), tol_or(cfg, name, stat_tol)));
    }
  }
}

std::vector<Column> force_summary(const mori::Dynamics& dyn, const mori::ForceEnsemble& eta, std::size_t components) {
  const auto& p = dyn.projection();
  const auto count = eta.frames.cols();
  Eigen::VectorXcd proj(count), norm(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    proj[k] = p.coefficient(eta.frames.col(k));
    norm[k] = dyn.space().norm(eta.frames.col(k));
  }
  std::vector<Column> cols{{"eta_z", proj}, {"eta_norm", norm}};
  const auto shown = std::min<Eigen::Index>(static_cast<Eigen::Index>(components), eta.frames.rows());
  for (Eigen::Index i = 0; i < shown; ++i) cols.push_back({"eta_" + std::to_string(i), eta.frames.row(i).transpose()});
  return cols;
}

RunResult run_matrix(const RunConfig& cfg) {
  const MatrixSetup setup = build_matrix(cfg);
  const TimeGrid grid = run_grid(cfg);
  RunResult out;
  out.grid = grid;
  const double dt2 = cfg.dt * cfg.dt;

  mori::MatrixDynamics dyn(setup.model, setup.z, grid);
  mori::GleInputs in = mori::gle_inputs(dyn);
  mori::GleIngredients ing{in.omega, mori::extract_kernel(in.g, in.h), {}, in.C};
  ing.eta = mori::fluctuating_forces(dyn, ing.K);
  if (cfg.zero_memory) zero_memory(ing);
  out.inputs = in;
  out.K = ing.K;
  out.forces = force_summary(dyn, ing.eta, 16);

  const double eta0 = std::max(1.0, dyn.space().partial_norm2(0, ing.eta.frames.leftCols(1))[0]);
  const auto& p = dyn.projection();
  for (const auto& name : cfg.checks) {
    if (name == "dyson") {
      out.checks.push_back(orthdyn::check_dyson(setup.model, p, grid, tol_or(cfg, name, -1.0)));
    } else if (name == "unitarity") {
      if (setup.skew)
        out.checks.push_back(orthdyn::check_unitarity(setup.model, p, grid, tol_or(cfg, name, 1e-10)));
      else
        out.checks.push_back(not_applicable(name, "generator is not skew-adjoint"));
    } else if (name == "semigroup" || name == "growth_bound") {
      const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.t_max / 10.0 / cfg.dt)));
      const double ts = grid.node(std::min(step, (grid.count - 1) / 2));
      const auto probes = probe_vectors(dyn.space(), cfg.seed, 10);
      std::vector<CheckResult> parts;
      if (name == "semigroup") {
        const orthdyn::OrbitFactory factory = [&dyn](const Vector& x) { return orthdyn::orbit(dyn, x); };
        for (const auto& x : probes)
          parts.push_back(orthdyn::check_semigroup(factory, dyn.space(), x, ts, ts, tol_or(cfg, name, 10.0 * dt2)));
      } else {
        const auto gb = linops::growth_bound(setup.model, grid.t_max(), 51);
        const double ldz = dyn.space().norm(dyn.adjoint_z()), zn = std::sqrt(p.zz());
        for (const auto& x : probes)
          parts.push_back(orthdyn::check_growth_bound(orthdyn::orbit(dyn, x), gb, dyn.space(), ldz, zn));
      }
      out.checks.push_back(worst_of(name, parts));
    }
  }
  gle_checks(cfg, dyn, ing, setup.skew, std::max(1e-8, 10.0 * dt2 * kernel_scale(ing.K)), 1e-8,
             std::max(1e-8, 10.0 * dt2 * eta0), out);
  order_like(cfg, out.checks);
  return out;
}

RunResult run_trajectory(const RunConfig& cfg, std::shared_ptr<const tj::TrajectoryEnsemble> ens) {
  const TrajectorySetup setup = build_trajectory(cfg);
  if (!ens) ens = simulate(cfg, setup);
  RunResult out;
  out.grid = ens->grid();
  const double root_n = std::sqrt(static_cast<double>(ens->samples()));

  tj::EnsembleDynamics dyn(ens, setup.spec, setup.pairing);
  mori::GleInputs in = mori::gle_inputs(dyn);
  mori::GleIngredients ing{in.omega, mori::extract_kernel(in.g, in.h), {}, in.C};
  ing.eta = mori::fluctuating_forces(dyn, ing.K);
  if (cfg.zero_memory) zero_memory(ing);
  out.inputs = in;
  out.K = ing.K;
  out.forces = force_summary(dyn, ing.eta, 8);

  const double eta0 = dyn.space().partial_norm2(0, ing.eta.frames.leftCols(1))[0];
  const bool paired = setup.spec.sampler.reversal.size() > 0;
  const double fdt_tol = cfg.zero_memory ? 5.0 / root_n * kernel_scale(ing.K)
                                         : fdt_mc_tolerance(dyn, ing, setup.measure_preserving, paired);
  gle_checks(cfg, dyn, ing, setup.measure_preserving, fdt_tol, 5.0 / root_n,
             10.0 / root_n * std::max(eta0, 1e-300), out);

  for (const auto& name : cfg.checks) {
    if (name == "isometry") {
      const auto& z = setup.spec.z;
      out.checks.push_back(tj::check_isometry(*ens, z, z, tol_or(cfg, name, tj::isometry_tolerance(*ens, z, z))));
    } else if (name == "omega0") {
      Eigen::MatrixXd X(static_cast<Eigen::Index>(ens->dim()), static_cast<Eigen::Index>(ens->samples()));
      for (std::size_t i = 0; i < ens->samples(); ++i) {
        const auto s = ens->state(i, 0);
        for (std::size_t d = 0; d < ens->dim(); ++d)
          X(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = s[d];
      }
      const auto est = tj::estimate_omega0(setup.spec, X);
      CheckResult r = judge(name, {est.value}, {0.0}, tol_or(cfg, name, 1e-6));
      r.t.reset();
      r.note = "omega0 = " + std::to_string(est.value);
      if (est.flagged_unbounded) {
        r.status = Status::fail;
        r.note += ", running maximum has no plateau";
      }
      out.checks.push_back(r);
    } else if (name == "kernel_reference") {
      if (!setup.kernel_reference) {
        out.checks.push_back(not_applicable(name, "system has no reference kernel"));
        continue;
      }
      const Complex ref = *setup.kernel_reference;
      std::vector<double> dev, t;
      for (std::size_t k = 0; k < ing.K.size(); ++k) {
        dev.push_back(std::abs(ing.K[k] - ref) / std::abs(ref));
        t.push_back(ing.K.grid.node(k));
      }
      out.checks.push_back(judge(name, dev, t, tol_or(cfg, name, 0.02)));
    }
  }
  order_like(cfg, out.checks);
  return out;
}

RunResult run_nonstationary(const RunConfig& cfg) {
  const NsSetup setup = build_nonstationary(cfg);
  const TimeGrid grid = run_grid(cfg);
  RunResult out;
  out.grid = grid;

  auto family = std::make_shared<const ns::EvolutionFamily>(ns::propagate_family(setup.generator, grid, setup.dim, setup.substeps));
  ns::NsProblem problem(setup.generator, family, setup.base, setup.z);
  auto pairs = ns::sample_pairs(grid);
  ns::NsResult res = ns::ns_extract(problem, pairs);
  if (cfg.zero_memory) {
    res.K = volterra::TwoTimeField(grid);
    for (auto& [_, v] : res.eta.frames) v.setZero();
  }

  Eigen::VectorXcd k_t0(static_cast<Eigen::Index>(grid.count)), k_diag(static_cast<Eigen::Index>(grid.count));
  Eigen::VectorXcd C(static_cast<Eigen::Index>(grid.count));
  for (std::size_t k = 0; k < grid.count; ++k) {
    k_t0[static_cast<Eigen::Index>(k)] = res.K(k, 0);
    k_diag[static_cast<Eigen::Index>(k)] = res.K(k, k);
    C[static_cast<Eigen::Index>(k)] = setup.base.inner((*family)(k, 0) * setup.z, setup.z);
  }
  out.K = Series(grid, k_t0);
  out.kernel_extra = {{"K_diag", k_diag}};
  out.forces = {{"C", C}};

  const std::size_t stride = std::max<std::size_t>(1, grid.count / 60);
  for (const auto& name : cfg.checks) {
    if (name == "composition") {
      out.checks.push_back(ns::check_composition(*family, setup.base, tol_or(cfg, name, 1e-8), stride));
    } else if (name == "nsgle_residual") {
      out.checks.push_back(ns::verify_nsgle(problem, res, tol_or(cfg, name, 1e-3)));
    } else if (name == "ns_orthogonality" || name == "ns_fdt2") {
      auto two = ns::verify_ns_2fdt(problem, res, tol_or(cfg, "ns_orthogonality", 1e-6), tol_or(cfg, "ns_fdt2", 1e-3));
      out.checks.push_back(name == "ns_orthogonality" ? two[0] : two[1]);
    } else if (name == "force_constancy") {
      out.checks.push_back(ns::check_force_constancy(problem, res, tol_or(cfg, name, 1e-3)));
    }
  }
  return out;
}

}  // namespace

TimeGrid run_grid(const RunConfig& cfg) { return TimeGrid::span(cfg.t_max, cfg.dt); }

MatrixSetup build_matrix(const RunConfig& cfg) {
  const Field sys(cfg.system, "system");
  const std::size_t n = sys.unsigned_int("n", 0) ? sys.unsigned_int("n", 0) : sys["generator"].size();
  if (n == 0) sys.fail("empty system");
  const Field gen = sys["generator"];
  Matrix L;
  if (gen.json().is_object() && gen.has("random_skew")) {
    L = models::random_skew_generator(n, gen["random_skew"].unsigned_int("seed", 1));
  } else {
    L = matrix_block(gen, n, "generator", [&gen, n](std::uint64_t s) {
      return models::random_generator(n, s, gen["random"].number("dissipation", 0.2));
    });
  }
  hilbert::Space space = weight_block(sys, n);
  Vector z = sys.has("z") ? vector_block(sys["z"], n) : models::random_vector(n, 4);
  try {
    linops::OperatorModel model(space, L);
    const bool skew = linops::is_skew_adjoint(model, 1e-10);
    return {std::move(model), std::move(z), skew};
  } catch (const ConstructionError& e) {
    gen.fail(e.what());
  }
}

TrajectorySetup build_trajectory(const RunConfig& cfg) {
  const Field sys(cfg.system, "system");
  const std::string model = sys.string("model", "harmonic_oscillator");
  TrajectorySetup out;
  if (model == "harmonic_oscillator") {
    const double w = sys.number("omega", 2.0);
    out.spec = tj::catalogue::harmonic_oscillator(w, sys.number("beta", 1.0), sys.boolean("reversal_pairs", true));
    out.measure_preserving = true;
    out.kernel_reference = Complex(-w * w, 0.0);
  } else if (model == "rotation") {
    out.spec = tj::catalogue::rotation();
    out.measure_preserving = true;
  } else if (model == "logistic_drift") {
    out.spec = tj::catalogue::logistic_drift();
  } else if (model == "dissipative_mismatch") {
    out.spec = tj::catalogue::dissipative_mismatch(sys.number("omega", 2.0), sys.number("beta", 1.0));
  } else if (model == "linear") {
    const Eigen::MatrixXd A = sys["A"].real_matrix();
    const Eigen::MatrixXd S = sys["covariance"].real_matrix();
    if (A.rows() != A.cols() || S.rows() != A.rows() || S.cols() != A.cols())
      sys.fail("A and covariance must be square of the same size");
    out.spec = tj::catalogue::linear_system(A, S);
    // A S + S A^T = 0 and div F = tr A = 0 make the Gaussian invariant with L^dagger = -L.
    out.measure_preserving = (A * S + S * A.transpose()).norm() < 1e-12 * (1.0 + A.norm() * S.norm()) &&
                             std::abs(A.trace()) < 1e-12;
  } else {
    sys["model"].fail("unknown model '" + model +
                      "' (harmonic_oscillator, rotation, logistic_drift, dissipative_mismatch, linear)");
  }
  if (sys.has("observable")) out.spec.z = observable(sys["observable"], out.spec.dim);
  if (sys.has("kernel_reference")) out.kernel_reference = sys["kernel_reference"].complex();
  const std::string pairing = sys.string("pairing", "generator");
  if (pairing == "adjoint")
    out.pairing = tj::Pairing::adjoint;
  else if (pairing != "generator")
    sys["pairing"].fail("expected \"generator\" or \"adjoint\"");
  return out;
}

NsSetup build_nonstationary(const RunConfig& cfg) {
  const Field sys(cfg.system, "system");
  const std::string model = sys.string("model", "driven_oscillator");
  NsSetup out;
  if (model == "driven_oscillator") {
    out.generator = models::driven_oscillator(sys.number("w2", 4.0), sys.number("a", 1.0));
    out.dim = 2;
  } else if (model == "constant") {
    const Matrix L = sys["generator"].complex_matrix();
    if (L.rows() != L.cols()) sys["generator"].fail("generator must be square");
    out.generator = [L](double) { return L; };
    out.dim = static_cast<std::size_t>(L.rows());
  } else {
    sys["model"].fail("unknown model '" + model + "' (driven_oscillator, constant)");
  }
  out.base = weight_block(sys, out.dim);
  if (sys.has("z")) {
    out.z = vector_block(sys["z"], out.dim);
  } else {
    out.z = Vector::Zero(static_cast<Eigen::Index>(out.dim));
    out.z[0] = 1.0;
  }
  out.substeps = sys.unsigned_int("substeps", 4);
  if (out.substeps == 0) sys["substeps"].fail("must be positive");
  return out;
}

std::shared_ptr<const tj::TrajectoryEnsemble> simulate(const RunConfig& cfg, const TrajectorySetup& setup) {
  const auto init = tj::sample_initial(setup.spec, cfg.samples, cfg.seed);
  return std::make_shared<const tj::TrajectoryEnsemble>(
      tj::integrate_flow(setup.spec, init.states, run_grid(cfg), cfg.substeps, cfg.seed));
}

mori::GleInputs correlate(const TrajectorySetup& setup, std::shared_ptr<const tj::TrajectoryEnsemble> ens) {
  tj::EnsembleDynamics dyn(std::move(ens), setup.spec, setup.pairing);
  return mori::gle_inputs(dyn);
}

RunResult execute(const RunConfig& cfg, std::shared_ptr<const tj::TrajectoryEnsemble> ens) {
  switch (cfg.backend) {
    case Backend::matrix: return run_matrix(cfg);
    case Backend::trajectory: return run_trajectory(cfg, std::move(ens));
    case Backend::nonstationary: return run_nonstationary(cfg);
  }
  throw Error("unknown backend");
}

void write_correlation(const std::filesystem::path& path, const mori::GleInputs& in) {
  Eigen::VectorXcd w = Eigen::VectorXcd::Constant(in.C.values.size(), in.omega);
  write_csv(path, in.C.grid, {{"C", in.C.values}, {"g", in.g.values}, {"h", in.h.values}, {"omega", w}});
}

void write_kernel(const std::filesystem::path& path, const Series& K, const std::vector<Column>& extra) {
  std::vector<Column> cols{{"K", K.values}};
  cols.insert(cols.end(), extra.begin(), extra.end());
  write_csv(path, K.grid, cols);
}

void write_artifacts(const std::filesystem::path& dir, const RunResult& result) {
  if (result.K) write_kernel(dir / "kernel.csv", *result.K, result.kernel_extra);
  if (result.inputs) write_correlation(dir / "correlation.csv", *result.inputs);
  if (!result.forces.empty()) write_csv(dir / "forces.csv", result.grid, result.forces);
}

Environment environment(const RunConfig& cfg) {
  Environment env;
  env.backend = to_string(cfg.backend);
  env.seed = cfg.seed;
  env.dt = cfg.dt;
  env.t_max = cfg.t_max;
  env.samples = cfg.backend == Backend::trajectory ? cfg.samples : 0;
  env.version = version_string();
  return env;
}

int exit_code(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    if (c.status == Status::fail) return 2;
  return 0;
}

}  // namespace mgle::app
