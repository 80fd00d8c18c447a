#include "mgle/linops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mgle/error.hpp"

namespace mgle::linops {

OperatorModel::OperatorModel(hilbert::Space space, Matrix generator) : space_(std::move(space)), L_(std::move(generator)) {
  if (space_.kind() != hilbert::Space::Kind::coordinate)
    throw ConstructionError("operator models need a coordinate space");
  if (L_.rows() != L_.cols()) throw ConstructionError("generator must be square");
  if (static_cast<std::size_t>(L_.rows()) != space_.dim())
    throw DimensionError("generator size", space_.dim(), static_cast<std::size_t>(L_.rows()));
  if (!L_.allFinite()) throw ConstructionError("generator has non-finite entries");
}

Matrix adjoint(const hilbert::Space& space, const Matrix& A) {
  const Matrix& W = space.weight();
  if (A.rows() != W.rows() || A.cols() != W.cols())
    throw DimensionError("adjoint: operator size", space.dim(), static_cast<std::size_t>(A.rows()));
  Eigen::LLT<Matrix> llt(W);
  return llt.solve(A.adjoint() * W);
}

OperatorModel adjoint(const OperatorModel& model) {
  return OperatorModel(model.space(), adjoint(model.space(), model.generator()));
}

namespace {

constexpr std::array<double, 14> kPade13 = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                            1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                            670442572800.0,      33522128640.0,       1323241920.0,
                                            40840800.0,          960960.0,            16380.0,
                                            182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

bool is_normal(const Matrix& A) {
  const double scale = std::max(A.squaredNorm(), 1e-300);
  return (A * A.adjoint() - A.adjoint() * A).norm() <= 1e-12 * scale;
}

Matrix expm_normal(const Matrix& A) {
  Eigen::ComplexSchur<Matrix> schur(A);
  const Matrix& T = schur.matrixT();
  const Matrix& U = schur.matrixU();
  Eigen::VectorXcd d = T.diagonal().array().exp();
  return U * d.asDiagonal() * U.adjoint();
}

}  // namespace

Matrix expm(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionError("expm: square matrix", A.rows(), A.cols());
  if (!A.allFinite()) throw AccuracyError("expm: non-finite input", std::numeric_limits<double>::infinity());
  const Eigen::Index n = A.rows();
  if (n == 0) return A;

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return Matrix::Identity(n, n);
  int s = 0;
  if (norm1 > kTheta13) s = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));

  const double bound = (s + 1) * norm1 * std::numeric_limits<double>::epsilon();
  if (bound > 1e-8) {
    if (is_normal(A)) return expm_normal(A);
    throw AccuracyError("expm: rounding bound " + std::to_string(bound) + " exceeds 1e-8", bound);
  }

  const Matrix X = A / std::ldexp(1.0, s);
  const Matrix I = Matrix::Identity(n, n);
  const Matrix X2 = X * X;
  const Matrix X4 = X2 * X2;
  const Matrix X6 = X4 * X2;
  const auto& b = kPade13;

  Matrix U = X * (X6 * (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * I);
  Matrix V = X6 * (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * I;
  Matrix R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) R = R * R;
  return R;
}

Matrix expm_action(const OperatorModel& model, double t) {
  if (!std::isfinite(t)) throw AccuracyError("expm_action: non-finite time", std::numeric_limits<double>::infinity());
  return expm(model.generator() * t);
}

double operator_norm(const hilbert::Space& space, const Matrix& A) {
  const Matrix& R = space.cholesky_factor();
  const Matrix B = R * A * R.triangularView<Eigen::Upper>().solve(Matrix::Identity(R.rows(), R.cols()));
  Eigen::JacobiSVD<Matrix> svd(B);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

bool is_skew_adjoint(const OperatorModel& model, double tol) {
  const Matrix S = model.generator() + adjoint(model.space(), model.generator());
  return operator_norm(model.space(), S) <= tol * (operator_norm(model.space(), model.generator()) + 1.0);
}

GrowthBound growth_bound(const OperatorModel& model, double horizon, std::size_t samples) {
  if (!(horizon > 0.0) || samples < 2) throw Error("growth_bound: need horizon > 0 and at least 2 samples");
  std::vector<double> t(samples), logn(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    t[i] = horizon * static_cast<double>(i) / static_cast<double>(samples - 1);
    logn[i] = std::log(std::max(operator_norm(model.space(), expm_action(model, t[i])), 1e-300));
  }
  GrowthBound gb;
  gb.omega = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < samples; ++i) gb.omega = std::max(gb.omega, (logn[i] - logn[i - 1]) / (t[i] - t[i - 1]));
  double logM = 0.0;
  for (std::size_t i = 0; i < samples; ++i) logM = std::max(logM, logn[i] - gb.omega * t[i]);
  gb.M = std::exp(logM);
  return gb;
}

}  // namespace mgle::linops
