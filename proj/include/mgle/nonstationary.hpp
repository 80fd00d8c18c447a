#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "mgle/hilbert.hpp"
#include "mgle/report.hpp"
#include "mgle/volterra.hpp"

namespace mgle::nonstationary {

using volterra::TimeGrid;
using volterra::TwoTimeField;

/// t -> L(t)
using Generator = std::function<Matrix(double)>;

constexpr std::size_t kMaxNodes = 2000;

/// U(t_k, t_j) for k >= j, with U(r,s) U(t,r) = U(t,s).
class EvolutionFamily {
 public:
  EvolutionFamily(TimeGrid grid, std::size_t dim);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  const Matrix& operator()(std::size_t k, std::size_t j) const { return U_[offset(k, j)]; }
  Matrix& operator()(std::size_t k, std::size_t j) { return U_[offset(k, j)]; }

 private:
  std::size_t offset(std::size_t k, std::size_t j) const;

  TimeGrid grid_;
  std::size_t dim_;
  std::vector<Matrix> U_;
};

/// Integrates dU(t,s)/dt = U(t,s) L(t), U(s,s) = I, with RK4 column by column.
/// Throws ConstructionError beyond kMaxNodes grid nodes and NonFiniteError on overflow.
EvolutionFamily propagate_family(const Generator& gen, const TimeGrid& grid, std::size_t dim, std::size_t substeps = 4);

/// max over the sampled triples t >= r >= s of ||U(r,s) U(t,r) - U(t,s)|| (weighted operator norm).
CheckResult check_composition(const EvolutionFamily& family, const hilbert::Space& space, double tol,
                              std::size_t stride = 1);

/// (x, y)_t = (U(t,t0) x, U(t,t0) y).
class NsMetric {
 public:
  NsMetric(std::shared_ptr<const EvolutionFamily> family, hilbert::Space base);

  const EvolutionFamily& family() const noexcept { return *family_; }
  const hilbert::Space& base() const noexcept { return base_; }
  /// Gram matrix U(t_k,t0)^H W U(t_k,t0).
  const Matrix& gram(std::size_t k) const { return gram_.at(k); }
  Complex inner(std::size_t k, const Vector& x, const Vector& y) const;
  double norm(std::size_t k, const Vector& x) const;

 private:
  std::shared_ptr<const EvolutionFamily> family_;
  hilbert::Space base_;
  std::vector<Matrix> gram_;
};

struct Split {
  Vector parallel;
  Vector orthogonal;
};

/// P(t_k) x = (x, z)_k / (z, z)_k z; throws Error if (z, z)_k < 1e-12.
Split ns_project(const NsMetric& metric, const Vector& z, std::size_t k, const Vector& x);

/// Fluctuating forces eta_{t_k, t_j}, kept only at the requested index pairs.
struct NsForces {
  std::map<std::pair<std::size_t, std::size_t>, Vector> frames;
  const Vector& at(std::size_t k, std::size_t j) const;
  bool has(std::size_t k, std::size_t j) const { return frames.count({k, j}) > 0; }
};

struct NsResult {
  TwoTimeField K;
  NsForces eta;
};

/// Index pairs (k, j), k >= j, at the fractions 0, 1/m, ..., 1 of the grid; closed under
/// the pairs the non-stationary checks need.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(const TimeGrid& grid, std::size_t m = 6);

class NsProblem {
 public:
  NsProblem(Generator gen, std::shared_ptr<const EvolutionFamily> family, hilbert::Space base, Vector z);

  const NsMetric& metric() const noexcept { return metric_; }
  const EvolutionFamily& family() const noexcept { return *family_; }
  const Vector& z() const noexcept { return z_; }
  const Matrix& generator(std::size_t k) const { return L_.at(k); }
  /// Q(t_k) L(t_k) z
  const Vector& qlz(std::size_t k) const { return qlz_.at(k); }

  /// Solves the two-time kernel equation on the whole triangle.
  TwoTimeField kernel() const;
  /// eta_{t_k, t_j} = U(t_k,t_j) Q(t_k) L(t_k) z - int_{t_j}^{t_k} K(t_k, r) U(r, t_j) z dr (trapezoid).
  Vector force(const TwoTimeField& K, std::size_t k, std::size_t j) const;

 private:
  Generator gen_;
  std::shared_ptr<const EvolutionFamily> family_;
  NsMetric metric_;
  Vector z_;
  std::vector<Matrix> L_;
  std::vector<Vector> qlz_;
};

NsResult ns_extract(const NsProblem& problem, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// Residual ||U(t,t0)L(t)z - U(t,t0)P(t)L(t)z - U(s,t0) eta_ts - int_s^t K(t,r) U(r,t0) z dr|| / ||z||
/// over the stored force pairs; the memory integral uses composite Simpson.
CheckResult verify_nsgle(const NsProblem& problem, const NsResult& result, double tol);

/// Orthogonality |(eta_ts, z)_s| / (||eta_ts||_s ||z||_s) and
/// |K(t,s) + (eta_{t,t0}, eta_{s,t0}) / (z,z)_s| over the stored pairs.
std::vector<CheckResult> verify_ns_2fdt(const NsProblem& problem, const NsResult& result, double tol_orthogonality,
                                        double tol_fdt);

/// max over stored (t, r), (s, r) of |(eta_tr, eta_sr)_r - (eta_{t,t0}, eta_{s,t0})|.
CheckResult check_force_constancy(const NsProblem& problem, const NsResult& result, double tol);

}  // namespace mgle::nonstationary
