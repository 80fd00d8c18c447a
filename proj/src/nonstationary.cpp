#include "mgle/nonstationary.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "mgle/error.hpp"
#include "mgle/linops.hpp"
#include "mgle/parallel.hpp"

namespace mgle::nonstationary {

EvolutionFamily::EvolutionFamily(TimeGrid grid, std::size_t dim) : grid_(grid), dim_(dim) {
  if (grid.count > kMaxNodes)
    throw ConstructionError("evolution families are capped at " + std::to_string(kMaxNodes) + " grid nodes");
  U_.resize(grid.count * (grid.count + 1) / 2);
}

std::size_t EvolutionFamily::offset(std::size_t k, std::size_t j) const {
  if (j > k || k >= grid_.count) throw Error("evolution family index outside the triangle");
  return k * (k + 1) / 2 + j;
}

EvolutionFamily propagate_family(const Generator& gen, const TimeGrid& grid, std::size_t dim, std::size_t substeps) {
  if (substeps < 1) throw ConstructionError("substeps must be at least 1");
  EvolutionFamily fam(grid, dim);
  const auto n = static_cast<Eigen::Index>(dim);
  const double h = grid.dt / static_cast<double>(substeps);

  // L at every stage time, shared by all columns
  std::vector<Matrix> stage(2 * substeps * (grid.count - 1) + 1);
  for (std::size_t i = 0; i < stage.size(); ++i) {
    stage[i] = gen(grid.t0 + 0.5 * h * static_cast<double>(i));
    if (stage[i].rows() != n || stage[i].cols() != n) throw DimensionError("generator size", dim, stage[i].rows());
    if (!stage[i].allFinite()) throw NonFiniteError("generator is not finite at t = " + std::to_string(grid.t0 + 0.5 * h * i));
  }

  parallel_for(grid.count, [&](std::size_t j) {
    Matrix U = Matrix::Identity(n, n);
    fam(j, j) = U;
    for (std::size_t k = j + 1; k < grid.count; ++k) {
      for (std::size_t sub = 0; sub < substeps; ++sub) {
        const std::size_t base = 2 * ((k - 1) * substeps + sub);
        const Matrix k1 = U * stage[base];
        const Matrix k2 = (U + 0.5 * h * k1) * stage[base + 1];
        const Matrix k3 = (U + 0.5 * h * k2) * stage[base + 1];
        const Matrix k4 = (U + h * k3) * stage[base + 2];
        U += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      if (!U.allFinite()) {
        std::ostringstream msg;
        msg << "evolution family is not finite at (t, s) = (" << grid.node(k) << ", " << grid.node(j) << ")";
        throw NonFiniteError(msg.str());
      }
      fam(k, j) = U;
    }
  });
  return fam;
}

CheckResult check_composition(const EvolutionFamily& fam, const hilbert::Space& space, double tol, std::size_t stride) {
  stride = std::max<std::size_t>(stride, 1);
  std::vector<double> dev, t;
  double worst = -1.0;
  std::size_t wt = 0, ws = 0;
  for (std::size_t k = 0; k < fam.grid().count; k += stride)
    for (std::size_t r = 0; r <= k; r += stride)
      for (std::size_t j = 0; j <= r; j += stride) {
        const double d = linops::operator_norm(space, fam(r, j) * fam(k, r) - fam(k, j));
        dev.push_back(d);
        t.push_back(fam.grid().node(k));
        if (d > worst) {
          worst = d;
          wt = k;
          ws = j;
        }
      }
  CheckResult res = judge("composition", dev, t, tol);
  res.t = fam.grid().node(wt);
  res.s = fam.grid().node(ws);
  return res;
}

NsMetric::NsMetric(std::shared_ptr<const EvolutionFamily> family, hilbert::Space base)
    : family_(std::move(family)), base_(std::move(base)) {
  if (!family_) throw ConstructionError("metric needs an evolution family");
  if (family_->dim() != base_.dim()) throw DimensionError("metric base space", family_->dim(), base_.dim());
  gram_.resize(family_->grid().count);
  for (std::size_t k = 0; k < gram_.size(); ++k) {
    const Matrix& U = (*family_)(k, 0);
    gram_[k] = U.adjoint() * base_.weight() * U;
  }
}

Complex NsMetric::inner(std::size_t k, const Vector& x, const Vector& y) const {
  base_.require_member(x, "metric: first argument");
  base_.require_member(y, "metric: second argument");
  return y.dot(gram_.at(k) * x);
}

double NsMetric::norm(std::size_t k, const Vector& x) const { return std::sqrt(std::max(inner(k, x, x).real(), 0.0)); }

Split ns_project(const NsMetric& metric, const Vector& z, std::size_t k, const Vector& x) {
  const double zz = metric.inner(k, z, z).real();
  if (!(zz >= 1e-12)) throw Error("(z, z)_t is degenerate at t = " + std::to_string(metric.family().grid().node(k)));
  Split s;
  s.parallel = metric.inner(k, x, z) / zz * z;
  s.orthogonal = x - s.parallel;
  return s;
}

const Vector& NsForces::at(std::size_t k, std::size_t j) const {
  const auto it = frames.find({k, j});
  if (it == frames.end())
    throw Error("fluctuating force at index pair (" + std::to_string(k) + ", " + std::to_string(j) + ") was not stored");
  return it->second;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(const TimeGrid& grid, std::size_t m) {
  std::set<std::size_t> nodes;
  const std::size_t last = grid.count - 1;
  for (std::size_t a = 0; a <= m; ++a) nodes.insert(static_cast<std::size_t>(std::llround(static_cast<double>(a * last) / m)));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k : nodes)
    for (std::size_t j : nodes)
      if (j <= k) out.emplace_back(k, j);
  return out;
}

NsProblem::NsProblem(Generator gen, std::shared_ptr<const EvolutionFamily> family, hilbert::Space base, Vector z)
    : gen_(std::move(gen)), family_(family), metric_(family, std::move(base)), z_(std::move(z)) {
  metric_.base().require_member(z_, "observable of interest");
  const std::size_t count = family_->grid().count;
  L_.resize(count);
  qlz_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    L_[k] = gen_(family_->grid().node(k));
    qlz_[k] = ns_project(metric_, z_, k, L_[k] * z_).orthogonal;
  }
}

TwoTimeField NsProblem::kernel() const {
  const TimeGrid& grid = family_->grid();
  const std::size_t count = grid.count;
  TwoTimeField G(grid), H(grid), K(grid);
  std::vector<double> zz(count);
  for (std::size_t j = 0; j < count; ++j) zz[j] = metric_.inner(j, z_, z_).real();
  parallel_for(count, [&](std::size_t k) {
    for (std::size_t j = 0; j <= k; ++j) {
      const Matrix& U = (*family_)(k, j);
      G(k, j) = metric_.inner(j, U * qlz_[k], qlz_[j]) / zz[j];
      H(k, j) = metric_.inner(j, U * z_, qlz_[j]) / zz[j];
    }
  });
  parallel_for(count, [&](std::size_t k) {
    const Eigen::VectorXcd row = volterra::solve_two_time(G, H, k);
    for (std::size_t j = 0; j <= k; ++j) K(k, j) = row[static_cast<Eigen::Index>(j)];
  });
  return K;
}

Vector NsProblem::force(const TwoTimeField& K, std::size_t k, std::size_t j) const {
  Vector eta = (*family_)(k, j) * qlz_[k];
  if (k == j) return eta;
  const double dt = family_->grid().dt;
  const Eigen::VectorXd w = volterra::quadrature_weights(k - j, volterra::Rule::trapezoid);
  for (std::size_t r = j; r <= k; ++r) eta -= dt * w[static_cast<Eigen::Index>(r - j)] * K(k, r) * ((*family_)(r, j) * z_);
  return eta;
}

NsResult ns_extract(const NsProblem& problem, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  NsResult res;
  res.K = problem.kernel();
  for (const auto& [k, j] : pairs) res.eta.frames[{k, j}] = problem.force(res.K, k, j);
  return res;
}

CheckResult verify_nsgle(const NsProblem& p, const NsResult& res, double tol) {
  const auto& fam = p.family();
  const auto& base = p.metric().base();
  const double dt = fam.grid().dt;
  const double zn = base.norm(p.z());
  std::vector<double> dev, t;
  CheckResult worst_loc;
  double worst = -1.0;
  std::pair<std::size_t, std::size_t> at{0, 0};
  for (const auto& [key, eta] : res.eta.frames) {
    const auto [k, j] = key;
    const Vector lz = p.generator(k) * p.z();
    const Vector plz = ns_project(p.metric(), p.z(), k, lz).parallel;
    Vector r = fam(k, 0) * (lz - plz) - fam(j, 0) * eta;
    if (k > j) {
      const Eigen::VectorXd w = volterra::quadrature_weights(k - j, volterra::Rule::simpson);
      for (std::size_t m = j; m <= k; ++m) r -= dt * w[static_cast<Eigen::Index>(m - j)] * res.K(k, m) * (fam(m, 0) * p.z());
    }
    dev.push_back(base.norm(r) / zn);
    t.push_back(fam.grid().node(k));
    if (dev.back() > worst) {
      worst = dev.back();
      at = key;
    }
  }
  CheckResult c = judge("nsgle_residual", dev, t, tol);
  c.t = fam.grid().node(at.first);
  c.s = fam.grid().node(at.second);
  return c;
}

std::vector<CheckResult> verify_ns_2fdt(const NsProblem& p, const NsResult& res, double tol_orth, double tol_fdt) {
  const auto& fam = p.family();
  const auto& metric = p.metric();
  std::vector<double> d_orth, t_orth, d_fdt, t_fdt;
  std::pair<std::size_t, std::size_t> w_orth{0, 0}, w_fdt{0, 0};
  double m_orth = -1.0, m_fdt = -1.0;
  for (const auto& [key, eta] : res.eta.frames) {
    const auto [k, j] = key;
    const double zz = metric.inner(j, p.z(), p.z()).real();
    const double en = std::max(metric.norm(j, eta), metric.norm(j, fam(k, j) * (p.generator(k) * p.z())));
    const double num = std::abs(metric.inner(j, eta, p.z()));
    d_orth.push_back(num == 0.0 ? 0.0 : num / (en * std::sqrt(zz)));
    t_orth.push_back(fam.grid().node(k));
    if (d_orth.back() > m_orth) {
      m_orth = d_orth.back();
      w_orth = key;
    }
    if (res.eta.has(k, 0) && res.eta.has(j, 0)) {
      const Complex c = metric.base().inner(res.eta.at(k, 0), res.eta.at(j, 0)) / zz;
      d_fdt.push_back(std::abs(res.K(k, j) + c));
      t_fdt.push_back(fam.grid().node(k));
      if (d_fdt.back() > m_fdt) {
        m_fdt = d_fdt.back();
        w_fdt = key;
      }
    }
  }
  CheckResult orth = judge("ns_orthogonality", d_orth, t_orth, tol_orth);
  orth.t = fam.grid().node(w_orth.first);
  orth.s = fam.grid().node(w_orth.second);
  CheckResult fdt = judge("ns_fdt2", d_fdt, t_fdt, tol_fdt);
  fdt.t = fam.grid().node(w_fdt.first);
  fdt.s = fam.grid().node(w_fdt.second);
  if (d_fdt.empty()) fdt = not_applicable("ns_fdt2", "no forces stored at s = t0");
  return {orth, fdt};
}

CheckResult check_force_constancy(const NsProblem& p, const NsResult& res, double tol) {
  const auto& metric = p.metric();
  std::set<std::size_t> nodes;
  for (const auto& [key, eta] : res.eta.frames) nodes.insert(key.first);
  std::vector<double> dev, t;
  for (std::size_t k : nodes)
    for (std::size_t j : nodes) {
      if (j > k || !res.eta.has(k, 0) || !res.eta.has(j, 0)) continue;
      const Complex ref = metric.base().inner(res.eta.at(k, 0), res.eta.at(j, 0));
      for (std::size_t r : nodes) {
        if (r > j || !res.eta.has(k, r) || !res.eta.has(j, r)) continue;
        dev.push_back(std::abs(metric.inner(r, res.eta.at(k, r), res.eta.at(j, r)) - ref));
        t.push_back(p.family().grid().node(r));
      }
    }
  return judge("force_constancy", dev, t, tol);
}

}  // namespace mgle::nonstationary
