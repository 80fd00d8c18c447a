#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <memory>

#include <unsupported/Eigen/MatrixFunctions>

#include "mgle/catalogue.hpp"
#include "mgle/error.hpp"
#include "mgle/parallel.hpp"
#include "mgle/trajectory.hpp"

using namespace mgle;
using namespace mgle::trajectory;
namespace cat = mgle::trajectory::catalogue;

namespace {
double energy(State x) { return 0.5 * x[1] * x[1] + 2.0 * x[0] * x[0]; }

Eigen::Vector2d point(double q, double p) { return {q, p}; }
State as_state(const Eigen::Vector2d& v) { return {v.data(), 2}; }
}  // namespace

TEST_CASE("sampler moments") {
  const std::size_t N = 100000;
  const SampleSet g = sample_initial(cat::rotation(), N, 1);
  const Eigen::VectorXd mean = g.states.rowwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() < 5.0 / std::sqrt(double(N)));

  const SampleSet gibbs = sample_initial(cat::harmonic_oscillator(2.0, 1.0, false), N, 2);
  const double q2 = gibbs.states.row(0).squaredNorm() / double(N), p2 = gibbs.states.row(1).squaredNorm() / double(N);
  CHECK(std::abs(q2 - 0.25) < 5.0 / std::sqrt(double(N)));
  CHECK(std::abs(p2 - 1.0) < 5.0 * std::sqrt(2.0) / std::sqrt(double(N)));
}

TEST_CASE("reversal pairs and determinism") {
  const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
  const SampleSet a = sample_initial(osc, 1000, 9), b = sample_initial(osc, 1000, 9), c = sample_initial(osc, 1000, 10);
  CHECK(a.states == b.states);
  CHECK(a.states != c.states);
  for (Eigen::Index i = 0; i + 1 < a.states.cols(); i += 2) {
    CHECK(a.states(0, i + 1) == a.states(0, i));
    CHECK(a.states(1, i + 1) == -a.states(1, i));
  }
}

TEST_CASE("metropolis sampler reports diagnostics") {
  const SampleSet s = sample_initial(cat::logistic_drift(), 2000, 4);
  CHECK(s.diagnostics.proposals > 2000);
  CHECK_FALSE(s.diagnostics.warning);
  CHECK(std::abs(s.states.row(0).mean()) < 0.3);
}

TEST_CASE("flow integration") {
  const TimeGrid grid = TimeGrid::span(5.0, 1e-2);
  SUBCASE("zero field keeps states") {
    SystemSpec still = cat::rotation();
    still.F = [](State, std::span<double> f) { f[0] = f[1] = 0.0; };
    still.F_batch = nullptr;
    const Eigen::MatrixXd X = sample_initial(still, 5, 1).states;
    const TrajectoryEnsemble e = integrate_flow(still, X, grid);
    for (std::size_t i = 0; i < 5; ++i) CHECK(e.state(i, grid.count - 1)[1] == X(1, static_cast<Eigen::Index>(i)));
  }
  SUBCASE("oscillator energy drift") {
    const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
    const Eigen::MatrixXd X = sample_initial(osc, 50, 3).states;
    const TrajectoryEnsemble e = integrate_flow(osc, X, grid, 10);
    double drift = 0.0;
    for (std::size_t i = 0; i < 50; ++i)
      for (std::size_t k = 0; k < grid.count; ++k)
        drift = std::max(drift, std::abs(energy(e.state(i, k)) - energy(e.state(i, 0))) / energy(e.state(i, 0)));
    CHECK(drift <= 1e-8);
  }
  SUBCASE("linear flow matches the matrix exponential") {
    Eigen::MatrixXd A(3, 3);
    A << -0.2, 1.0, 0.0, -1.0, -0.1, 0.5, 0.0, -0.5, 0.0;
    const SystemSpec lin = cat::linear_system(A, Eigen::MatrixXd::Identity(3, 3));
    const Eigen::MatrixXd X = sample_initial(lin, 20, 5).states;
    const TrajectoryEnsemble e = integrate_flow(lin, X, grid);
    double err = 0.0;
    for (std::size_t k = 0; k < grid.count; k += 50) {
      const Eigen::MatrixXd E = (A * grid.node(k)).exp();
      for (std::size_t i = 0; i < 20; ++i) {
        const Eigen::Vector3d ref = E * X.col(static_cast<Eigen::Index>(i));
        for (int d = 0; d < 3; ++d) err = std::max(err, std::abs(e.state(i, k)[static_cast<std::size_t>(d)] - ref[d]));
      }
    }
    CHECK(err < 1e-8);
  }
  SUBCASE("flow property and time reversal") {
    const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
    const Eigen::MatrixXd X = sample_initial(osc, 10, 7).states;
    const TrajectoryEnsemble e = integrate_flow(osc, X, grid);
    const std::size_t k = 200;
    Eigen::MatrixXd mid(2, 10), end(2, 10);
    for (std::size_t i = 0; i < 10; ++i) {
      mid.col(static_cast<Eigen::Index>(i)) = Eigen::Vector2d(e.state(i, k)[0], e.state(i, k)[1]);
      end.col(static_cast<Eigen::Index>(i)) = Eigen::Vector2d(e.state(i, grid.count - 1)[0], e.state(i, grid.count - 1)[1]);
    }
    const TimeGrid rest(0.0, grid.dt, grid.count - k);
    const TrajectoryEnsemble e2 = integrate_flow(osc, mid, rest);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t d = 0; d < 2; ++d) CHECK(std::abs(e2.state(i, rest.count - 1)[d] - end(Eigen::Index(d), Eigen::Index(i))) < 1e-8);

    SystemSpec back = osc;
    back.F = [](State x, std::span<double> f) {
      f[0] = -x[1];
      f[1] = 4.0 * x[0];
    };
    back.F_batch = nullptr;
    const TrajectoryEnsemble r = integrate_flow(back, end, grid);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t d = 0; d < 2; ++d) CHECK(std::abs(r.state(i, grid.count - 1)[d] - X(Eigen::Index(d), Eigen::Index(i))) < 1e-8);
  }
  SUBCASE("blow-up is reported") {
    SystemSpec boom = cat::rotation();
    boom.F = [](State x, std::span<double> f) {
      f[0] = x[0] * x[0];
      f[1] = 0.0;
    };
    boom.F_batch = nullptr;
    Eigen::MatrixXd X(2, 2);
    X << 0.0, 10.0, 0.0, 0.0;
    try {
      integrate_flow(boom, X, grid);
      FAIL("expected NonFiniteError");
    } catch (const NonFiniteError& e) {
      CHECK(std::string(e.what()).find("sample 1") != std::string::npos);
    }
  }
}

TEST_CASE("threads do not change results") {
  const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
  const Eigen::MatrixXd X = sample_initial(osc, 600, 3).states;
  const TimeGrid grid = TimeGrid::span(1.0, 1e-2);
  set_threads(1);
  const TrajectoryEnsemble a = integrate_flow(osc, X, grid);
  const Series ca = estimate_correlation(a, osc.z, osc.z);
  set_threads(3);
  const TrajectoryEnsemble b = integrate_flow(osc, X, grid);
  const Series cb = estimate_correlation(b, osc.z, osc.z);
  set_threads(1);
  CHECK(a.data() == b.data());
  CHECK(ca.values == cb.values);
}

TEST_CASE("correlations of the oscillator") {
  const std::size_t N = 20000;
  const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
  const TimeGrid grid = TimeGrid::span(5.0, 1e-2);
  const TrajectoryEnsemble e = integrate_flow(osc, sample_initial(osc, N, 11).states, grid);
  const Series C = estimate_correlation(e, osc.z, osc.z);
  double q2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) q2 += e.state(i, 0)[0] * e.state(i, 0)[0];
  CHECK(std::abs(C[0] - q2 / double(N)) < 1e-15);
  for (std::size_t k = 0; k < grid.count; k += 10) CHECK(std::abs(C[k] - 0.25 * std::cos(2.0 * grid.node(k))) < 5 * 0.25 / std::sqrt(double(N)));
  const Series qp = estimate_correlation(e, osc.z, cat::coordinate(1, 2));
  CHECK(std::abs(qp[0]) < 5.0 * 0.5 / std::sqrt(double(N)));
}

TEST_CASE("generator action") {
  const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
  const ObservableSpec Lq = apply_generator(osc, cat::coordinate(0, 2));
  const ObservableSpec Lp = apply_generator(osc, cat::coordinate(1, 2));
  ObservableSpec half_q2 = cat::monomial({2, 0});
  const ObservableSpec Lh = apply_generator(osc, half_q2);
  for (const auto& x : {point(0.3, -1.2), point(-2.0, 0.7), point(1.5, 1.5)}) {
    CHECK(std::abs(Lq.value(as_state(x)) - x[1]) < 1e-14);
    CHECK(std::abs(Lp.value(as_state(x)) + 4.0 * x[0]) < 1e-14);
    CHECK(std::abs(Lh.value(as_state(x)) - 2.0 * x[0] * x[1]) < 1e-12);
  }
  // Finite-difference fallback when no gradient is supplied.
  ObservableSpec bare;
  bare.value = [](State x) { return Complex(x[0] * x[0] * x[1], 0.0); };
  const ObservableSpec Lb = apply_generator(osc, bare);
  for (const auto& x : {point(0.3, -1.2), point(-2.0, 0.7)}) {
    const Complex ref = 2 * x[0] * x[1] * x[1] - 4.0 * x[0] * x[0] * x[0];
    CHECK(std::abs(Lb.value(as_state(x)) - ref) < 1e-6 * (1 + std::abs(ref)));
  }
  CHECK_THROWS_AS(apply_generator(osc, bare, false), Error);
}

TEST_CASE("save and load round trip") {
  const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
  const TimeGrid grid = TimeGrid::span(0.5, 0.05);
  const TrajectoryEnsemble e = integrate_flow(osc, sample_initial(osc, 7, 1).states, grid);
  const auto path = (std::filesystem::temp_directory_path() / "mgle-roundtrip.bin").string();
  e.save(path);
  const TrajectoryEnsemble r = TrajectoryEnsemble::load(path);
  std::filesystem::remove(path);
  CHECK(r.dim() == 2);
  CHECK(r.samples() == 7);
  CHECK(r.grid().same_as(grid));
  CHECK(r.data() == e.data());
  CHECK_THROWS_AS(TrajectoryEnsemble::load(path), Error);
}

TEST_CASE("growth constant estimates") {
  const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
  CHECK(estimate_omega0(osc, sample_initial(osc, 5000, 1).states).value <= 1e-6);
  const SystemSpec rot = cat::rotation();
  CHECK(estimate_omega0(rot, sample_initial(rot, 5000, 1).states).value <= 1e-12);
  const SystemSpec logi = cat::logistic_drift();
  const Omega0Estimate w = estimate_omega0(logi, sample_initial(logi, 20000, 1).states);
  CHECK(w.value >= 0.45);
  CHECK(w.value <= 0.5);
  CHECK_FALSE(w.flagged_unbounded);
}

TEST_CASE("isometry of invariant densities") {
  const std::size_t N = 20000;
  const TimeGrid grid = TimeGrid::span(5.0, 1e-2);
  const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
  const TrajectoryEnsemble e = integrate_flow(osc, sample_initial(osc, N, 2).states, grid);
  const double tol = isometry_tolerance(e, osc.z, osc.z);
  const CheckResult ok = check_isometry(e, osc.z, osc.z, tol);
  CHECK(ok.passed());

  const SystemSpec bad = cat::dissipative_mismatch(2.0, 1.0);
  const TrajectoryEnsemble d = integrate_flow(bad, sample_initial(bad, N, 2).states, grid);
  CHECK_FALSE(check_isometry(d, bad.z, bad.z, isometry_tolerance(d, bad.z, bad.z)).passed());
}

TEST_CASE("ensemble Mori constructions for the oscillator") {
  const std::size_t N = 4000;
  const TimeGrid grid = TimeGrid::span(5.0, 1e-2);
  const SystemSpec osc = cat::harmonic_oscillator(2.0, 1.0);
  auto ens = std::make_shared<const TrajectoryEnsemble>(integrate_flow(osc, sample_initial(osc, N, 5).states, grid));
  const EnsembleDynamics dyn(ens, osc);
  CHECK(std::abs(dyn.omega()) < 1e-15);
  const mori::GleIngredients ing = mori::assemble(dyn);
  CHECK((ing.K.values.array() + 4.0).abs().maxCoeff() < 0.02 * 4.0);
  // eta_t is the initial momentum.
  const Vector p0 = dyn.evaluate(cat::coordinate(1, 2));
  double worst = 0.0;
  for (Eigen::Index k = 0; k < ing.eta.frames.cols(); ++k)
    worst = std::max(worst, dyn.space().norm(ing.eta.frames.col(k) - p0) / dyn.space().norm(p0));
  CHECK(worst < 0.01);
}
