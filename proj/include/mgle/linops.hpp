#pragma once

#include <cstddef>

#include "mgle/hilbert.hpp"

namespace mgle::linops {

/// A square generator acting on a coordinate space.
class OperatorModel {
 public:
  /// Throws ConstructionError for an ensemble space or a non-square L, DimensionError on size mismatch.
  OperatorModel(hilbert::Space space, Matrix generator);

  const hilbert::Space& space() const noexcept { return space_; }
  const Matrix& generator() const noexcept { return L_; }
  std::size_t dim() const noexcept { return space_.dim(); }

 private:
  hilbert::Space space_;
  Matrix L_;
};

struct GrowthBound {
  double M = 1.0;
  double omega = 0.0;
};

/// W^{-1} A^H W, the adjoint of A with respect to the weighted inner product.
Matrix adjoint(const hilbert::Space& space, const Matrix& A);
OperatorModel adjoint(const OperatorModel& model);

/// Matrix exponential by scaling and squaring with the [13/13] Pade approximant.
///
/// Throws AccuracyError when the a-priori rounding bound exceeds 1e-8 and the matrix is not normal;
/// normal matrices fall back to a diagonalization.
Matrix expm(const Matrix& A);
Matrix expm_action(const OperatorModel& model, double t);

/// Operator norm induced by the space's inner product.
double operator_norm(const hilbert::Space& space, const Matrix& A);

bool is_skew_adjoint(const OperatorModel& model, double tol);

/// Fits ||e^{Lt}|| <= M e^{omega t} on `samples` equispaced points of [0, horizon].
GrowthBound growth_bound(const OperatorModel& model, double horizon, std::size_t samples);

}  // namespace mgle::linops
