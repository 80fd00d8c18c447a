#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "mgle/error.hpp"
#include "mgle/linops.hpp"
#include "mgle/models.hpp"

using namespace mgle;
using hilbert::Space;
using linops::OperatorModel;

namespace {
Matrix m2(Complex a, Complex b, Complex c, Complex d) {
  Matrix A(2, 2);
  A << a, b, c, d;
  return A;
}
Matrix diag2(double a, double b) { return m2(a, 0.0, 0.0, b); }
}  // namespace

TEST_CASE("adjoint examples") {
  const Space id = Space::coordinate_identity(2);
  CHECK((linops::adjoint(id, m2(0, 1, 0, 0)) - m2(0, 0, 1, 0)).norm() < 1e-15);
  const Matrix rot = m2(0, 1, -1, 0);
  CHECK((linops::adjoint(id, rot) + rot).norm() < 1e-15);

  const Space w = Space::coordinate(diag2(2, 1));
  const Matrix A = m2(0, 1, 0, 0);
  const Matrix Ad = linops::adjoint(w, A);
  CHECK((Ad - m2(0, 0, 2, 0)).norm() < 1e-14);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Vector x = models::random_vector(2, s), y = models::random_vector(2, 50 + s);
    CHECK(std::abs(w.inner(A * x, y) - w.inner(x, Ad * y)) < 1e-14);
  }
}

TEST_CASE("adjoint involution and adjoint exponential") {
  const Space w = Space::coordinate(models::random_weight(6, 4));
  const Matrix L = models::random_generator(6, 9, 0.3);
  CHECK((linops::adjoint(w, linops::adjoint(w, L)) - L).cwiseAbs().maxCoeff() < 1e-12);
  const OperatorModel m(w, L);
  const OperatorModel md = linops::adjoint(m);
  for (double t : {0.3, 1.7, 4.0})
    CHECK((linops::expm_action(md, t) - linops::adjoint(w, linops::expm_action(m, t))).norm() < 1e-10);
}

TEST_CASE("expm closed forms") {
  CHECK((linops::expm(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm() == 0.0);
  Matrix d = Matrix::Zero(1, 1);
  d(0, 0) = -1.0;
  CHECK(std::abs(linops::expm(d)(0, 0) - std::exp(-1.0)) < 1e-15);
  for (double t : {0.5, 3.0, 40.0})
    CHECK((linops::expm(m2(0, t, 0, 0)) - m2(1, t, 0, 1)).norm() < 1e-12 * (1 + t));
}

TEST_CASE("expm agrees with an independent implementation") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix L = models::random_generator(8, seed, 0.1);
    for (double t : {0.01, 1.0, 5.0}) {
      const Matrix A = L * t;
      const Matrix ref = A.exp();
      CHECK((linops::expm(A) - ref).norm() <= 1e-12 * std::max(1.0, ref.norm()));
    }
  }
}

TEST_CASE("expm refuses unreliable input") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = std::nan("");
  CHECK_THROWS_AS(linops::expm(A), AccuracyError);
  CHECK_THROWS_AS(linops::expm(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("semigroup law") {
  const OperatorModel m(Space::coordinate(models::random_weight(8, 1)), models::random_generator(8, 2, 0.2));
  const auto gb = linops::growth_bound(m, 10.0, 101);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 10; ++i) {
    const double t = u(rng), s = u(rng);
    const Matrix lhs = linops::expm_action(m, t) * linops::expm_action(m, s);
    CHECK((lhs - linops::expm_action(m, t + s)).norm() <= 1e-10 * std::exp(std::abs(gb.omega) * (t + s)) * 10.0);
  }
}

TEST_CASE("skew adjointness") {
  CHECK(linops::is_skew_adjoint(OperatorModel(Space::coordinate_identity(2), m2(0, 1, -1, 0)), 1e-12));
  CHECK_FALSE(linops::is_skew_adjoint(OperatorModel(Space::coordinate_identity(2), diag2(-1, -2)), 1e-12));
  CHECK(linops::is_skew_adjoint(OperatorModel(Space::coordinate_identity(7), models::random_skew_generator(7, 11)), 1e-12));
  // Skew with respect to W, not the Euclidean product.
  const Matrix W = diag2(4, 1);
  CHECK(linops::is_skew_adjoint(OperatorModel(Space::coordinate(W), m2(0, 1, -4, 0)), 1e-12));
  CHECK_FALSE(linops::is_skew_adjoint(OperatorModel(Space::coordinate_identity(2), m2(0, 1, -4, 0)), 1e-12));
}

TEST_CASE("operator norm uses the weight") {
  const Space w = Space::coordinate(diag2(4, 1));
  // ||A x||_W / ||x||_W for A mapping e1 -> e2: sup = 1/2.
  CHECK(linops::operator_norm(w, m2(0, 0, 1, 0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(linops::operator_norm(Space::coordinate_identity(2), m2(0, 0, 1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("growth bound fits") {
  const Space id2 = Space::coordinate_identity(2);
  const auto skew = linops::growth_bound(OperatorModel(id2, m2(0, 1, -1, 0)), 5.0, 51);
  CHECK(skew.M <= 1.0 + 1e-10);
  CHECK(skew.omega <= 1e-10);

  Matrix d = Matrix::Zero(1, 1);
  d(0, 0) = 2.0;
  const auto expo = linops::growth_bound(OperatorModel(Space::coordinate_identity(1), d), 5.0, 101);
  CHECK(expo.omega >= 2.0 - 1e-6);

  for (const Matrix& L : {m2(0, 1, 0, 0), models::random_generator(2, 8, -0.1)}) {
    const OperatorModel m(id2, L);
    const double T = 5.0;
    const std::size_t n = 51;
    const auto gb = linops::growth_bound(m, T, n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = T * static_cast<double>(i) / static_cast<double>(n - 1);
      CHECK(linops::operator_norm(id2, linops::expm_action(m, t)) <= gb.M * std::exp(gb.omega * t) * (1 + 1e-10));
    }
  }
}

TEST_CASE("operator models validate their inputs") {
  CHECK_THROWS_AS(OperatorModel(Space::uniform_ensemble(2), Matrix::Zero(2, 2)), ConstructionError);
  CHECK_THROWS_AS(OperatorModel(Space::coordinate_identity(2), Matrix::Zero(2, 3)), ConstructionError);
  CHECK_THROWS_AS(OperatorModel(Space::coordinate_identity(3), Matrix::Zero(2, 2)), DimensionError);
}
