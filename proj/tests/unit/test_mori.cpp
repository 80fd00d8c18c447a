#include <doctest.h>

#include <cmath>

#include "mgle/error.hpp"
#include "mgle/models.hpp"
#include "mgle/mori.hpp"

using namespace mgle;
using namespace mgle::mori;
using hilbert::Space;
using linops::OperatorModel;

namespace {
Vector v2(Complex a, Complex b) {
  Vector v(2);
  v << a, b;
  return v;
}

struct Random8 {
  OperatorModel model;
  Vector z;
  Random8(double dissipation = 0.2)
      : model(Space::coordinate(models::random_weight(8, 2)), models::random_generator(8, 1, dissipation)),
        z(models::random_vector(8, 3)) {}
};
}  // namespace

TEST_CASE("projection examples") {
  const MoriProjection p(Space::coordinate_identity(2), v2(1, 0));
  CHECK((p.parallel(v2(3, 4)) - v2(3, 0)).norm() == 0.0);
  CHECK((p.orthogonal(v2(3, 4)) - v2(0, 4)).norm() == 0.0);
  CHECK((p.parallel(p.z()) - p.z()).norm() == 0.0);
  CHECK(p.orthogonal(p.z()).norm() == 0.0);
  CHECK_THROWS_AS(MoriProjection(Space::coordinate_identity(2), v2(1e-13, 0)), ConstructionError);
}

TEST_CASE("projection algebra on random vectors") {
  const Space s = Space::coordinate(models::random_weight(6, 8));
  const MoriProjection p(s, models::random_vector(6, 9));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Vector x = models::random_vector(6, 20 + seed);
    const Vector Px = p.parallel(x), Qx = p.orthogonal(x);
    CHECK((p.parallel(Px) - Px).norm() < 1e-12);
    CHECK((p.orthogonal(Qx) - Qx).norm() < 1e-12);
    CHECK(p.parallel(Qx).norm() < 1e-12);
    CHECK(std::abs(s.inner(Px, Qx)) < 1e-12);
    CHECK(std::abs(s.inner(Qx, p.z())) < 1e-12);
  }
}

TEST_CASE("matrix inputs agree with brute-force inner products") {
  const Random8 r;
  const TimeGrid g = TimeGrid::span(2.0, 0.1);
  const MoriProjection p(r.model.space(), r.z);
  const GleInputs in = gle_inputs_matrix(r.model, p, g);
  const Matrix& L = r.model.generator();
  const Vector qlz = p.orthogonal(L * r.z);
  const Vector qldz = p.orthogonal(linops::adjoint(r.model.space(), L) * r.z);
  CHECK(std::abs(in.omega - r.model.space().inner(L * r.z, r.z) / p.zz()) < 1e-13);
  for (std::size_t k = 0; k < g.count; k += 5) {
    const Matrix U = linops::expm(L * g.node(k));
    const auto& s = r.model.space();
    CHECK(std::abs(in.g[k] - s.inner(U * qlz, qldz) / p.zz()) < 1e-11);
    CHECK(std::abs(in.h[k] - s.inner(U * r.z, qldz) / p.zz()) < 1e-11);
    CHECK(std::abs(in.C[k] - s.inner(U * r.z, r.z)) < 1e-11);
  }
}

TEST_CASE("skew generator with real z") {
  Matrix L(2, 2);
  L << 0, 1, -4, 0;
  Matrix W = Matrix::Zero(2, 2);
  W(0, 0) = 4;
  W(1, 1) = 1;
  const OperatorModel m(Space::coordinate(W), L);
  const MoriProjection p(m.space(), v2(1, 0));
  const TimeGrid g = TimeGrid::span(5.0, 0.01);
  const GleInputs in = gle_inputs_matrix(m, p, g);
  CHECK(std::abs(in.omega) < 1e-15);
  CHECK(std::abs(in.g[0] + std::pow(p.space().norm(p.orthogonal(L * p.z())), 2) / p.zz()) < 1e-14);
  const Series K = extract_kernel(in.g, in.h);
  CHECK((K.values.array() + 4.0).abs().maxCoeff() < 100 * g.dt * g.dt);

  // The closed equation for the autocorrelation is the oscillator in disguise.
  const Series C = memory_equation_predict(0.0, K, p.zz());
  double cerr = 0.0;
  for (std::size_t k = 0; k < g.count; ++k) cerr = std::max(cerr, std::abs(C[k] - p.zz() * std::cos(2.0 * g.node(k))));
  CHECK(cerr < 100 * g.dt * g.dt);
}

TEST_CASE("memory equation trivial cases") {
  const TimeGrid g = TimeGrid::span(2.0, 0.01);
  const Series zero = Series::zeros(g);
  const Series flat = memory_equation_predict(0.0, zero, 2.5);
  CHECK((flat.values.array() - 2.5).abs().maxCoeff() < 1e-15);
  const Complex w(-0.3, 1.0);
  const Series drift = memory_equation_predict(w, zero, 1.0);
  for (std::size_t k = 0; k < g.count; ++k) CHECK(std::abs(drift[k] - std::exp(w * g.node(k))) < 1e-4);
  CHECK_THROWS_AS(memory_equation_predict(200.0, zero, 1.0), SingularStepError);
}

TEST_CASE("one-dimensional space has no memory") {
  Matrix L(1, 1);
  L << Complex(-0.5, 1.0);
  const OperatorModel m(Space::coordinate_identity(1), L);
  Vector z(1);
  z << 1.0;
  const MatrixDynamics dyn(m, z, TimeGrid::span(5.0, 0.01));
  const GleIngredients ing = assemble(dyn);
  CHECK(ing.K.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(ing.eta.frames.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(verify_gle(dyn, ing, 1e-12).max_deviation < 1e-12);
  CHECK(std::abs(dyn.omega() - L(0, 0)) < 1e-15);
}

TEST_CASE("GLE assembly on a random model") {
  double prev = 0.0;
  for (double dt : {1e-2, 5e-3}) {
    const Random8 r;
    const MatrixDynamics dyn(r.model, r.z, TimeGrid::span(5.0, dt));
    const GleIngredients ing = assemble(dyn);
    const auto& p = dyn.projection();
    CHECK((ing.eta.frames.col(0) - p.orthogonal(r.model.generator() * r.z)).norm() < 1e-14);
    const CheckResult res = verify_gle(dyn, ing, 1e-3);
    CHECK(res.passed());
    if (prev > 0.0) {
      CHECK(prev / res.max_deviation > 3.0);
      CHECK(prev / res.max_deviation < 5.0);
    }
    prev = res.max_deviation;

    const Vector qldz = p.orthogonal(dyn.adjoint_z());
    CHECK(verify_2fdt(ing, p, qldz, false, 10 * dt * dt * 10).passed());
    CHECK(verify_orthogonality(ing.eta, p, 1e-3, 0.0).passed());
  }
}

TEST_CASE("negative controls") {
  const Random8 r;
  const MatrixDynamics dyn(r.model, r.z, TimeGrid::span(5.0, 1e-2));
  const GleIngredients ing = assemble(dyn);
  const auto& p = dyn.projection();

  GleIngredients none = ing;
  none.K.values.setZero();
  none.eta.frames.setZero();
  CHECK_FALSE(verify_gle(dyn, none, 1e-3).passed());

  // A kernel that does not solve the Volterra equation breaks the 2FDT.
  Series bumped = ing.K;
  for (std::size_t k = 0; k < bumped.size(); ++k) {
    const double t = bumped.grid.node(k);
    bumped[k] += 0.1 * std::exp(-10.0 * (t - 2.0) * (t - 2.0));
  }
  GleIngredients wrong = ing;
  wrong.K = bumped;
  wrong.eta = fluctuating_forces(dyn, bumped);
  CHECK_FALSE(verify_2fdt(wrong, p, p.orthogonal(dyn.adjoint_z()), false, 1e-3).passed());
}

TEST_CASE("trivial 2FDT and orthogonality at t = 0") {
  const TimeGrid g = TimeGrid::span(1.0, 0.1);
  const MoriProjection p(Space::coordinate_identity(2), v2(1, 0));
  GleIngredients ing{0.0, Series::zeros(g), ForceEnsemble{g, Matrix::Zero(2, static_cast<Eigen::Index>(g.count))},
                     Series::zeros(g)};
  CHECK(verify_2fdt(ing, p, v2(0, 1), true, 1e-12).passed());
  ing.eta.frames.col(0) = v2(0, 3);
  CHECK(verify_orthogonality(ing.eta, p, 1e-15, 1.0).max_deviation == 0.0);
}

TEST_CASE("memory application matches an explicit trapezoid sum") {
  const TimeGrid g(0.0, 0.1, 9);
  const Series K = Series::sample(g, [](double t) { return Complex(std::cos(t), t); });
  Matrix B(3, static_cast<Eigen::Index>(g.count));
  for (Eigen::Index c = 0; c < B.cols(); ++c) B.col(c) = models::random_vector(3, 60 + static_cast<std::uint64_t>(c));
  const Matrix out = apply_memory(B, K);
  for (std::size_t k = 0; k < g.count; ++k) {
    Vector ref = Vector::Zero(3);
    for (std::size_t j = 0; j <= k; ++j) {
      const double wj = (k == 0) ? 0.0 : ((j == 0 || j == k) ? 0.5 : 1.0);
      ref += g.dt * wj * K[k - j] * B.col(static_cast<Eigen::Index>(j));
    }
    CHECK((out.col(static_cast<Eigen::Index>(k)) - ref).norm() < 1e-14);
  }
  CHECK((B * memory_matrix(K) - out).norm() < 1e-14);
}
