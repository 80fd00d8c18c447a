#include "mgle/models.hpp"

#include <cmath>
#include <random>

namespace mgle::models {

namespace {

Matrix gaussian_matrix(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0 * static_cast<double>(n)));
  const auto m = static_cast<Eigen::Index>(n);
  Matrix A(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      A(i, j) = {re, im};
    }
  return A;
}

}  // namespace

Matrix random_generator(std::size_t n, std::uint64_t seed, double dissipation) {
  Matrix A = gaussian_matrix(n, seed);
  const double abscissa = A.eigenvalues().real().maxCoeff();
  A.diagonal().array() -= abscissa + dissipation;
  return A;
}

Matrix random_skew_generator(std::size_t n, std::uint64_t seed) {
  const Matrix A = gaussian_matrix(n, seed);
  const Matrix H = 0.5 * (A + A.adjoint());
  return Complex(0.0, 1.0) * H;
}

Matrix random_weight(std::size_t n, std::uint64_t seed) {
  const Matrix B = gaussian_matrix(n, seed);
  Matrix W = B.adjoint() * B + 0.5 * Matrix::Identity(B.rows(), B.cols());
  return 0.5 * (W + W.adjoint());
}

Vector random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) {
    const double re = normal(rng);
    const double im = normal(rng);
    x = {re, im};
  }
  return v / v.norm();
}

nonstationary::Generator driven_oscillator(double w2, double a) {
  return [w2, a](double t) {
    Matrix L(2, 2);
    L << 0.0, 1.0, -(w2 + a * std::sin(t)), 0.0;
    return L;
  };
}

}  // namespace mgle::models
