#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mgle/mori.hpp"
#include "mgle/report.hpp"
#include "mgle/volterra.hpp"

namespace mgle::trajectory {

using volterra::Series;
using volterra::TimeGrid;

using State = std::span<const double>;
using VectorField = std::function<void(State x, std::span<double> out)>;
using ScalarField = std::function<double(State x)>;

/// A complex-valued function of the phase-space state.
struct ObservableSpec {
  std::string name;
  std::function<Complex(State)> value;
  /// Optional; writes dz/dx_i. Missing gradients fall back to central differences.
  std::function<void(State, std::span<Complex>)> gradient;
  /// Optional; writes d2z/dx_i dx_j row-major. Lets the generator image carry an analytic gradient.
  std::function<void(State, std::span<Complex>)> hessian;
};

struct SamplerSpec {
  enum class Kind { gaussian, gibbs_quadratic, metropolis };
  Kind kind = Kind::gaussian;
  std::uint64_t seed = 0;

  Eigen::VectorXd mean;        ///< gaussian; defaults to zero
  Eigen::MatrixXd covariance;  ///< gaussian

  Eigen::MatrixXd hamiltonian;  ///< gibbs_quadratic: density proportional to exp(-beta x^T H x / 2)
  double beta = 1.0;

  double proposal_scale = 1.0;  ///< metropolis random-walk step
  std::size_t burn_in = 1000;
  std::size_t thinning = 0;     ///< chain steps discarded between kept samples
  Eigen::VectorXd start;        ///< metropolis initial state; defaults to zero

  /// Optional per-coordinate signs s. When set, odd-numbered samples are the reflection
  /// mean + s * (x - mean) of the preceding draw (e.g. momentum reversal for reversible dynamics).
  Eigen::VectorXd reversal;
};

struct SystemSpec {
  std::string name;
  std::size_t dim = 0;
  VectorField F;
  /// Optional batched form of F over `count` states stored one after another; used by the
  /// integrator when present.
  std::function<void(std::size_t count, const double* X, double* out)> F_batch;
  /// Optional; writes dF_i/dx_j row-major.
  std::function<void(State, std::span<double>)> jacobian;
  ScalarField divF;           ///< optional
  ScalarField log_rho;        ///< unnormalized
  VectorField grad_log_rho;   ///< optional
  ObservableSpec z;
  SamplerSpec sampler;
};

struct SamplerDiagnostics {
  std::size_t proposals = 0;
  std::size_t rejections = 0;
  std::size_t nonfinite = 0;
  bool warning = false;  ///< more than 90% of proposals rejected
};

/// Column i holds sample i.
struct SampleSet {
  Eigen::MatrixXd states;
  SamplerDiagnostics diagnostics;
};

/// Deterministic in (spec, N, seed). Direct samplers seed sample i with a hash of seed ^ i;
/// metropolis runs one chain.
SampleSet sample_initial(const SystemSpec& spec, std::size_t N, std::uint64_t seed);

/// phi_{t_k}(X_i) for every sample i and node k, stored sample-major.
class TrajectoryEnsemble {
 public:
  TrajectoryEnsemble(std::size_t dim, std::size_t samples, TimeGrid grid, std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t samples() const noexcept { return samples_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::uint64_t seed() const noexcept { return seed_; }

  State state(std::size_t i, std::size_t k) const {
    return {data_.data() + (i * grid_.count + k) * dim_, dim_};
  }
  std::span<double> state(std::size_t i, std::size_t k) {
    return {data_.data() + (i * grid_.count + k) * dim_, dim_};
  }
  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  /// Binary dump: "MGLE1", little-endian u64 n, N, count and f64 dt, then the [N x count x n] state
  /// array in column-major order (sample index fastest) as little-endian f64.
  void save(const std::string& path) const;
  static TrajectoryEnsemble load(const std::string& path);

 private:
  std::size_t dim_;
  std::size_t samples_;
  TimeGrid grid_;
  std::uint64_t seed_;
  std::vector<double> data_;
};

/// Fixed-step RK4 with step dt / substeps; throws NonFiniteError naming the sample and time.
TrajectoryEnsemble integrate_flow(const SystemSpec& spec, const Eigen::MatrixXd& initials, const TimeGrid& grid,
                                  std::size_t substeps = 10, std::uint64_t seed = 0);

/// (U(t)x, y) ~ sum_i w_i x(phi_t(X_i)) conj(y(X_i)). Empty weights mean uniform.
Series estimate_correlation(const TrajectoryEnsemble& ens, const ObservableSpec& x, const ObservableSpec& y,
                            const Eigen::VectorXd& weights = {});

/// (Lz)(x) = F(x) . grad z(x). The result carries an analytic gradient only when z has a Hessian and
/// F a Jacobian; otherwise applying the generator to it again requires `fd_fallback`.
ObservableSpec apply_generator(const SystemSpec& spec, const ObservableSpec& obs, bool fd_fallback = true);

/// Central-difference gradient with step eps^{1/3} (1 + |x_i|).
void fd_gradient(const std::function<Complex(State)>& f, State x, std::span<Complex> out);

/// -(Lz) - (div F + F . grad log rho) z evaluated at x.
Complex adjoint_generator_value(const SystemSpec& spec, const ObservableSpec& z, State x);

struct Omega0Estimate {
  double value = 0.0;
  Eigen::VectorXd location;
  bool flagged_unbounded = false;
  double first_decile_max = 0.0;
};

/// max_i |(div F + F . grad log rho)(X_i)| / 2 over the columns of `samples`.
/// Flags a missing plateau when the final running max exceeds the one after the first tenth of the
/// samples by more than 10% (plus 1e-9 absolute, to ignore finite-difference noise).
Omega0Estimate estimate_omega0(const SystemSpec& spec, const Eigen::MatrixXd& samples);

/// Max over the grid of |(U(t)x, U(t)y) - (x, y)|.
CheckResult check_isometry(const TrajectoryEnsemble& ens, const ObservableSpec& x, const ObservableSpec& y,
                           double tol, const Eigen::VectorXd& weights = {});

/// 5 std / sqrt(N), with std the sample standard deviation of x conj(y) at t = 0.
double isometry_tolerance(const TrajectoryEnsemble& ens, const ObservableSpec& x, const ObservableSpec& y);

/// How the pairing (U(t)x, L^dagger z) is estimated on the ensemble.
enum class Pairing {
  generator,  ///< (U(t) Lx, z): consistent with the sampled flow
  adjoint     ///< (U(t)x, L^dagger z) with the analytic L^dagger z
};

/// Ensemble backend of the Mori constructions: the space holds one value per sample.
class EnsembleDynamics final : public mori::Dynamics {
 public:
  EnsembleDynamics(std::shared_ptr<const TrajectoryEnsemble> ens, SystemSpec spec, Pairing pairing = Pairing::generator);

  const mori::MoriProjection& projection() const override { return *proj_; }
  const TimeGrid& grid() const override { return ens_->grid(); }
  const Vector& adjoint_z() const override { return ldag_z_; }
  const mori::Orbit& z_orbit() const override { return z_orbit_; }
  const mori::Orbit& lz_orbit() const override { return lz_orbit_; }

  const TrajectoryEnsemble& ensemble() const noexcept { return *ens_; }
  const SystemSpec& system() const noexcept { return spec_; }
  /// Values of an observable at t = 0, one per sample.
  Vector evaluate(const ObservableSpec& obs) const;
  mori::Orbit orbit(const ObservableSpec& x) const;

 private:
  mori::Orbit make_orbit(const ObservableSpec& x, const ObservableSpec* lx) const;

  std::shared_ptr<const TrajectoryEnsemble> ens_;
  SystemSpec spec_;
  Pairing pairing_;
  std::unique_ptr<mori::MoriProjection> proj_;
  Vector ldag_z_;
  mori::Orbit z_orbit_;
  mori::Orbit lz_orbit_;
};

}  // namespace mgle::trajectory
