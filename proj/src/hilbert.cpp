#include "mgle/hilbert.hpp"

#include <cmath>
#include <string>

#include "mgle/error.hpp"

namespace mgle::hilbert {

Space Space::coordinate(const Matrix& weight) {
  if (weight.rows() != weight.cols() || weight.rows() == 0)
    throw ConstructionError("weight matrix must be square and non-empty");
  if (!weight.allFinite()) throw ConstructionError("weight matrix has non-finite entries");
  const double herm = (weight - weight.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12) throw ConstructionError("weight matrix is not Hermitian (deviation " + std::to_string(herm) + ")");

  Eigen::LLT<Matrix> llt(0.5 * (weight + weight.adjoint()));
  if (llt.info() != Eigen::Success) throw ConstructionError("weight matrix is not positive definite");
  const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal().real();
  if (d.minCoeff() <= 0.0) throw ConstructionError("weight matrix is not positive definite");

  Space s;
  s.kind_ = Kind::coordinate;
  s.dim_ = static_cast<std::size_t>(weight.rows());
  s.weight_ = 0.5 * (weight + weight.adjoint());
  s.chol_ = llt.matrixU();
  s.identity_weight_ = (s.weight_ - Matrix::Identity(weight.rows(), weight.cols())).cwiseAbs().maxCoeff() == 0.0;
  return s;
}

Space Space::coordinate_identity(std::size_t dim) {
  return coordinate(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

Space Space::ensemble(const Eigen::VectorXd& weights) {
  if (weights.size() == 0) throw ConstructionError("ensemble needs at least one sample");
  if (!weights.allFinite() || weights.minCoeff() < 0.0)
    throw ConstructionError("ensemble weights must be finite and nonnegative");
  const double total = weights.sum();
  if (std::abs(total - 1.0) > 1e-12)
    throw ConstructionError("ensemble weights sum to " + std::to_string(total) + ", not 1");
  Space s;
  s.kind_ = Kind::ensemble;
  s.dim_ = static_cast<std::size_t>(weights.size());
  s.sample_weights_ = weights;
  return s;
}

Space Space::uniform_ensemble(std::size_t count) {
  if (count == 0) throw ConstructionError("ensemble needs at least one sample");
  return ensemble(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(count), 1.0 / static_cast<double>(count)));
}

const Matrix& Space::weight() const {
  if (kind_ != Kind::coordinate) throw Error("weight() requires a coordinate space");
  return weight_;
}

const Matrix& Space::cholesky_factor() const {
  if (kind_ != Kind::coordinate) throw Error("cholesky_factor() requires a coordinate space");
  return chol_;
}

const Eigen::VectorXd& Space::sample_weights() const {
  if (kind_ != Kind::ensemble) throw Error("sample_weights() requires an ensemble space");
  return sample_weights_;
}

void Space::require_member(const Vector& x, const char* what) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw DimensionError(what, dim_, static_cast<std::size_t>(x.size()));
}

Complex Space::inner(const Vector& x, const Vector& y) const {
  require_member(x, "inner: first argument");
  require_member(y, "inner: second argument");
  if (kind_ == Kind::coordinate) {
    if (identity_weight_) return y.dot(x);  // Eigen's dot conjugates its left operand
    return y.dot(weight_ * x);
  }
  Complex acc{0.0, 0.0};
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += sample_weights_[i] * x[i] * std::conj(y[i]);
  return acc;
}

double Space::norm(const Vector& x) const {
  const Complex v = inner(x, x);
  if (v.real() < -1e-12 * (1.0 + x.squaredNorm()))
    throw Error("internal consistency: negative squared norm " + std::to_string(v.real()));
  return std::sqrt(std::max(v.real(), 0.0));
}

std::size_t Space::max_block_rows() const noexcept { return kind_ == Kind::coordinate ? dim_ : 4096; }

Eigen::VectorXcd Space::partial_inner(std::size_t first, const Matrix& x, const Vector& y) const {
  const auto rows = static_cast<std::size_t>(x.rows());
  if (static_cast<std::size_t>(y.size()) != rows) throw DimensionError("partial_inner: block rows", rows, y.size());
  if (first + rows > dim_) throw DimensionError("partial_inner: block exceeds space", dim_, first + rows);
  if (kind_ == Kind::coordinate) {
    if (first != 0 || rows != dim_) throw Error("coordinate spaces only accept the full block");
    const Vector wy = identity_weight_ ? y : Vector(weight_ * y);
    return x.transpose() * wy.conjugate();
  }
  const Vector wy = sample_weights_.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows))
                        .cast<Complex>()
                        .cwiseProduct(y.conjugate());
  return x.transpose() * wy;
}

Eigen::VectorXd Space::partial_norm2(std::size_t first, const Matrix& x) const {
  const auto rows = static_cast<std::size_t>(x.rows());
  if (first + rows > dim_) throw DimensionError("partial_norm2: block exceeds space", dim_, first + rows);
  if (kind_ == Kind::coordinate) {
    if (first != 0 || rows != dim_) throw Error("coordinate spaces only accept the full block");
    if (identity_weight_) return x.colwise().squaredNorm().transpose();
    return (chol_ * x).colwise().squaredNorm().transpose();
  }
  const Eigen::VectorXd w = sample_weights_.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows));
  return x.cwiseAbs2().transpose() * w;
}

}  // namespace mgle::hilbert
