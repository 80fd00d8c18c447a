#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mgle/hilbert.hpp"
#include "mgle/linops.hpp"
#include "mgle/report.hpp"
#include "mgle/volterra.hpp"

namespace mgle::mori {

using volterra::Series;
using volterra::TimeGrid;

/// Rank-one orthogonal projection onto span(z).
class MoriProjection {
 public:
  /// Throws ConstructionError if norm(z) < 1e-12.
  MoriProjection(hilbert::Space space, Vector z);

  const hilbert::Space& space() const noexcept { return space_; }
  const Vector& z() const noexcept { return z_; }
  double zz() const noexcept { return zz_; }

  /// (x, z) / (z, z)
  Complex coefficient(const Vector& x) const;
  Vector parallel(const Vector& x) const;
  Vector orthogonal(const Vector& x) const;

 private:
  hilbert::Space space_;
  Vector z_;
  double zz_;
};

/// The trajectory t -> U(t)x of one element together with the two scalar series the
/// Volterra constructions consume.
struct Orbit {
  Vector initial;
  Series corr;  ///< (U(t)x, z)
  Series pair;  ///< (U(t)x, L^dagger z)
  /// Rows [first, first + rows) of U(t_k)x for every node k, as a rows x count block.
  std::function<Matrix(std::size_t first, std::size_t rows)> frames;
};

/// Backend-neutral view of an evolution U(t) sampled on a grid starting at t = 0.
class Dynamics {
 public:
  virtual ~Dynamics() = default;

  virtual const MoriProjection& projection() const = 0;
  virtual const TimeGrid& grid() const = 0;
  /// L^dagger z as an element of the space.
  virtual const Vector& adjoint_z() const = 0;
  virtual const Orbit& z_orbit() const = 0;
  virtual const Orbit& lz_orbit() const = 0;

  const hilbert::Space& space() const { return projection().space(); }
  std::size_t block_rows() const { return space().max_block_rows(); }
  /// (Lz, z) / (z, z)
  Complex omega() const;
};

/// Exact backend: U(t_k) = expm(L t_k) evaluated per node.
class MatrixDynamics final : public Dynamics {
 public:
  MatrixDynamics(linops::OperatorModel model, Vector z, TimeGrid grid);

  const MoriProjection& projection() const override { return proj_; }
  const TimeGrid& grid() const override { return grid_; }
  const Vector& adjoint_z() const override { return ldag_z_; }
  const Orbit& z_orbit() const override { return z_orbit_; }
  const Orbit& lz_orbit() const override { return lz_orbit_; }

  const linops::OperatorModel& model() const noexcept { return model_; }
  const Matrix& propagator(std::size_t k) const { return U_.at(k); }
  Orbit orbit(const Vector& x) const;

 private:
  linops::OperatorModel model_;
  MoriProjection proj_;
  TimeGrid grid_;
  std::vector<Matrix> U_;
  Vector ldag_z_;
  Orbit z_orbit_;
  Orbit lz_orbit_;
};

/// Builds the correlation series of an orbit by streaming its frames in row blocks.
/// `pair_with` is the element paired against for `Orbit::pair`.
void fill_series(const Dynamics& dyn, Orbit& orbit, const Vector& pair_with);

/// Fluctuating forces: column k holds eta_{t_k} as an element of the space.
struct ForceEnsemble {
  TimeGrid grid;
  Matrix frames;
};

struct GleInputs {
  Series g;
  Series h;
  Series C;
  Complex omega;
};

struct GleIngredients {
  Complex omega;
  Series K;
  ForceEnsemble eta;
  Series C;
};

GleInputs gle_inputs(const Dynamics& dyn);
GleInputs gle_inputs_matrix(const linops::OperatorModel& model, const MoriProjection& p, const TimeGrid& grid);

Series extract_kernel(const Series& g, const Series& h);

/// B T(K) computed in column chunks, for any rule; B holds one frame per grid node.
Matrix apply_memory(const Matrix& B, const Series& K, volterra::Rule rule = volterra::Rule::trapezoid);

/// Upper-triangular T with (B T)_k = dt * sum_j w_j K(t_k - t_j) B_j (trapezoid weights).
Matrix memory_matrix(const Series& K);

ForceEnsemble fluctuating_forces(const Dynamics& dyn, const Series& K);

GleIngredients assemble(const Dynamics& dyn);

/// Per-node ||d/dt U(t)z - U(t)PLz - eta_t - int K(t-s) U(s)z ds|| / ||z||.
/// The memory integral uses composite Simpson, so the residual measures the discretization error
/// of the trapezoid-based kernel and forces.
CheckResult verify_gle(const Dynamics& dyn, const GleIngredients& ing, double tol);

/// K(t) = (eta_t, QL^dagger z)/(z,z); with `skew` also K(t) = -(eta_t, eta_0)/(z,z).
CheckResult verify_2fdt(const GleIngredients& ing, const MoriProjection& p, const Vector& ql_dagger_z, bool skew,
                        double tol);

/// max_t |(eta_t, z)| / (max(||eta_t||, scale) ||z||). A scale such as ||Lz|| keeps forces that are
/// pure rounding (Lz parallel to z) from reading as relative error 1.
CheckResult verify_orthogonality(const ForceEnsemble& eta, const MoriProjection& p, double tol, double scale = 0.0);

/// Solves dC/dt = omega C + int_0^t K(t-s) C(s) ds, C(0) = C0, by implicit trapezoid marching.
Series memory_equation_predict(Complex omega, const Series& K, Complex C0);

}  // namespace mgle::mori
