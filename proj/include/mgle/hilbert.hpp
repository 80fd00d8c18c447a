#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace mgle {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

namespace hilbert {

/// A finite-dimensional complex inner-product space.
///
/// Two realizations share one interface:
///  - coordinate: C^n with (x, y) = y^H W x for a Hermitian positive-definite weight W;
///  - ensemble: one value per sample, (x, y) = sum_i w_i x_i conj(y_i), approximating L2(P).
///
/// The scalar product is linear in the first argument and conjugate-linear in the second.
/// Instances are immutable after construction.
class Space {
 public:
  enum class Kind { coordinate, ensemble };

  /// Throws ConstructionError unless `weight` is square, Hermitian within 1e-12 and positive definite.
  static Space coordinate(const Matrix& weight);
  static Space coordinate_identity(std::size_t dim);
  /// Throws ConstructionError unless all weights are nonnegative and sum to 1 within 1e-12.
  static Space ensemble(const Eigen::VectorXd& weights);
  static Space uniform_ensemble(std::size_t count);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Coordinate spaces only.
  const Matrix& weight() const;
  /// Upper-triangular R with W = R^H R (coordinate spaces only).
  const Matrix& cholesky_factor() const;
  /// Ensemble spaces only.
  const Eigen::VectorXd& sample_weights() const;

  Complex inner(const Vector& x, const Vector& y) const;
  double norm(const Vector& x) const;

  /// Row-blocked evaluation for data too large to hold as full vectors.
  ///
  /// `x` and `y` hold rows [first, first + rows) of column-stacked vectors; the result holds the
  /// partial sums of (x_k, y_k) over those rows for every column k. Summing the partials of all
  /// blocks gives the full inner products. Coordinate spaces couple every row through W and only
  /// accept the full block (first == 0, rows == dim).
  Eigen::VectorXcd partial_inner(std::size_t first, const Matrix& x, const Vector& y) const;
  Eigen::VectorXd partial_norm2(std::size_t first, const Matrix& x) const;

  /// Largest row block the space can evaluate at once.
  std::size_t max_block_rows() const noexcept;

  /// Throws DimensionError if x does not belong to this space.
  void require_member(const Vector& x, const char* what) const;

 private:
  Space() = default;

  Kind kind_ = Kind::coordinate;
  std::size_t dim_ = 0;
  Matrix weight_;
  Matrix chol_;
  Eigen::VectorXd sample_weights_;
  bool identity_weight_ = false;
};

}  // namespace hilbert
}  // namespace mgle
