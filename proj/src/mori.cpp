#include "mgle/mori.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "mgle/error.hpp"
#include "mgle/parallel.hpp"

namespace mgle::mori {

MoriProjection::MoriProjection(hilbert::Space space, Vector z) : space_(std::move(space)), z_(std::move(z)) {
  space_.require_member(z_, "projection vector");
  const double n = space_.norm(z_);
  if (!(n >= 1e-12)) throw ConstructionError("observable of interest has norm below 1e-12");
  zz_ = n * n;
}

Complex MoriProjection::coefficient(const Vector& x) const { return space_.inner(x, z_) / zz_; }
Vector MoriProjection::parallel(const Vector& x) const { return coefficient(x) * z_; }
Vector MoriProjection::orthogonal(const Vector& x) const { return x - parallel(x); }

Complex Dynamics::omega() const { return lz_orbit().corr[0] / projection().zz(); }

namespace {

struct Block {
  std::size_t first;
  std::size_t rows;
};

std::vector<Block> blocks_of(const Dynamics& dyn) {
  const std::size_t dim = dyn.space().dim();
  const std::size_t step = std::max<std::size_t>(1, dyn.block_rows());
  std::vector<Block> out;
  for (std::size_t first = 0; first < dim; first += step) out.push_back({first, std::min(step, dim - first)});
  return out;
}

Vector segment(const Vector& v, const Block& b) {
  return v.segment(static_cast<Eigen::Index>(b.first), static_cast<Eigen::Index>(b.rows));
}

void require_origin(const TimeGrid& grid) {
  if (grid.t0 != 0.0) throw Error("autonomous constructions need a grid starting at t0 = 0");
}

}  // namespace

void fill_series(const Dynamics& dyn, Orbit& orbit, const Vector& pair_with) {
  const auto blocks = blocks_of(dyn);
  const TimeGrid& grid = dyn.grid();
  const Vector& z = dyn.projection().z();
  std::vector<Eigen::VectorXcd> corr(blocks.size()), pair(blocks.size());
  parallel_for(blocks.size(), [&](std::size_t b) {
    const Matrix F = orbit.frames(blocks[b].first, blocks[b].rows);
    corr[b] = dyn.space().partial_inner(blocks[b].first, F, segment(z, blocks[b]));
    pair[b] = dyn.space().partial_inner(blocks[b].first, F, segment(pair_with, blocks[b]));
  });
  orbit.corr = Series::zeros(grid);
  orbit.pair = Series::zeros(grid);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    orbit.corr.values += corr[b];
    orbit.pair.values += pair[b];
  }
}

MatrixDynamics::MatrixDynamics(linops::OperatorModel model, Vector z, TimeGrid grid)
    : model_(std::move(model)), proj_(model_.space(), std::move(z)), grid_(grid) {
  require_origin(grid_);
  U_.resize(grid_.count);
  for (std::size_t k = 0; k < grid_.count; ++k) U_[k] = linops::expm_action(model_, grid_.node(k));
  ldag_z_ = linops::adjoint(model_.space(), model_.generator()) * proj_.z();
  z_orbit_ = orbit(proj_.z());
  lz_orbit_ = orbit(model_.generator() * proj_.z());
}

Orbit MatrixDynamics::orbit(const Vector& x) const {
  proj_.space().require_member(x, "orbit initial value");
  auto F = std::make_shared<Matrix>(x.size(), static_cast<Eigen::Index>(grid_.count));
  for (std::size_t k = 0; k < grid_.count; ++k) F->col(static_cast<Eigen::Index>(k)) = U_[k] * x;
  Orbit o;
  o.initial = x;
  o.frames = [F](std::size_t first, std::size_t rows) -> Matrix {
    return F->middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows));
  };
  fill_series(*this, o, ldag_z_);
  return o;
}

GleInputs gle_inputs(const Dynamics& dyn) {
  require_origin(dyn.grid());
  const double zz = dyn.projection().zz();
  const Complex w = dyn.omega();
  const auto& A = dyn.z_orbit().corr.values;
  const auto& B = dyn.z_orbit().pair.values;
  const auto& Al = dyn.lz_orbit().corr.values;
  const auto& Bl = dyn.lz_orbit().pair.values;
  GleInputs in;
  in.omega = w;
  in.g = Series(dyn.grid(), (Bl - w * B - w * (Al - w * A)) / zz);
  in.h = Series(dyn.grid(), (B - w * A) / zz);
  in.C = dyn.z_orbit().corr;
  return in;
}

GleInputs gle_inputs_matrix(const linops::OperatorModel& model, const MoriProjection& p, const TimeGrid& grid) {
  return gle_inputs(MatrixDynamics(model, p.z(), grid));
}

Series extract_kernel(const Series& g, const Series& h) { return volterra::solve_convolution(g, h); }

// B * T(K) without materializing all of T: output columns are produced in chunks.
Matrix apply_memory(const Matrix& B, const Series& K, volterra::Rule rule) {
  if (B.cols() != static_cast<Eigen::Index>(K.size())) throw DimensionError("apply_memory: frame count", K.size(), B.cols());
  const auto count = static_cast<Eigen::Index>(K.size());
  const double dt = K.grid.dt;
  // Real data (the usual case for trajectory ensembles) runs through a real GEMM at a quarter of the cost.
  const bool real = K.values.imag().cwiseAbs().maxCoeff() == 0.0 && B.imag().cwiseAbs().maxCoeff() == 0.0;
  const Eigen::MatrixXd Br = real ? Eigen::MatrixXd(B.real()) : Eigen::MatrixXd();
  Matrix out = Matrix::Zero(B.rows(), count);
  constexpr Eigen::Index chunk = 64;
  for (Eigen::Index k0 = 1; k0 < count; k0 += chunk) {
    const Eigen::Index k1 = std::min(count, k0 + chunk);
    Matrix T = Matrix::Zero(k1, k1 - k0);
    for (Eigen::Index k = k0; k < k1; ++k) {
      const Eigen::VectorXd w = volterra::quadrature_weights(static_cast<std::size_t>(k), rule);
      for (Eigen::Index j = 0; j <= k; ++j) T(j, k - k0) = dt * w[j] * K.values[k - j];
    }
    if (real)
      out.middleCols(k0, k1 - k0).real() = Br.leftCols(k1) * T.real();
    else
      out.middleCols(k0, k1 - k0).noalias() = B.leftCols(k1) * T;
  }
  return out;
}

Matrix memory_matrix(const Series& K) {
  const auto count = static_cast<Eigen::Index>(K.size());
  return apply_memory(Matrix::Identity(count, count), K, volterra::Rule::trapezoid);
}

ForceEnsemble fluctuating_forces(const Dynamics& dyn, const Series& K) {
  require_origin(dyn.grid());
  if (!K.grid.same_as(dyn.grid())) throw Error("fluctuating_forces: kernel grid differs from the dynamics grid");
  const Complex w = dyn.omega();
  const auto blocks = blocks_of(dyn);
  ForceEnsemble eta{dyn.grid(), Matrix(static_cast<Eigen::Index>(dyn.space().dim()), static_cast<Eigen::Index>(K.size()))};
  parallel_for(blocks.size(), [&](std::size_t b) {
    const auto [first, rows] = blocks[b];
    const Matrix Z = dyn.z_orbit().frames(first, rows);
    const Matrix Y = dyn.lz_orbit().frames(first, rows) - w * Z;
    eta.frames.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows)) =
        Y - apply_memory(Z, K, volterra::Rule::trapezoid);
  });
  // The memory term vanishes at t = 0, so the first frame is QLz up to the rounding in w * z.
  eta.frames.col(0) = dyn.lz_orbit().initial - w * dyn.projection().z();
  return eta;
}

GleIngredients assemble(const Dynamics& dyn) {
  GleInputs in = gle_inputs(dyn);
  GleIngredients ing;
  ing.omega = in.omega;
  ing.K = extract_kernel(in.g, in.h);
  ing.eta = fluctuating_forces(dyn, ing.K);
  ing.C = in.C;
  return ing;
}

CheckResult verify_gle(const Dynamics& dyn, const GleIngredients& ing, double tol) {
  const TimeGrid& grid = dyn.grid();
  if (!ing.K.grid.same_as(grid) || static_cast<std::size_t>(ing.eta.frames.cols()) != grid.count)
    throw Error("verify_gle: ingredients live on a different grid");
  if (static_cast<std::size_t>(ing.eta.frames.rows()) != dyn.space().dim())
    throw DimensionError("verify_gle: force frames", dyn.space().dim(), ing.eta.frames.rows());
  const Complex w = dyn.omega();
  const auto blocks = blocks_of(dyn);
  std::vector<Eigen::VectorXd> parts(blocks.size());
  parallel_for(blocks.size(), [&](std::size_t b) {
    const auto [first, rows] = blocks[b];
    const Matrix Z = dyn.z_orbit().frames(first, rows);
    const Matrix R = dyn.lz_orbit().frames(first, rows) - w * Z -
                     ing.eta.frames.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows)) -
                     apply_memory(Z, ing.K, volterra::Rule::simpson);
    parts[b] = dyn.space().partial_norm2(first, R);
  });
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.count));
  for (const auto& p : parts) total += p;
  const double zn = std::sqrt(dyn.projection().zz());
  std::vector<double> dev(grid.count), t(grid.count);
  for (std::size_t k = 0; k < grid.count; ++k) {
    dev[k] = std::sqrt(std::max(total[static_cast<Eigen::Index>(k)], 0.0)) / zn;
    t[k] = grid.node(k);
  }
  return judge("gle_residual", dev, t, tol);
}

CheckResult verify_2fdt(const GleIngredients& ing, const MoriProjection& p, const Vector& ql_dagger_z, bool skew,
                        double tol) {
  const auto& E = ing.eta.frames;
  const std::size_t count = ing.K.size();
  if (static_cast<std::size_t>(E.cols()) != count) throw DimensionError("verify_2fdt: force frames", count, E.cols());
  p.space().require_member(ql_dagger_z, "QL^dagger z");
  const Eigen::VectorXcd a = p.space().partial_inner(0, E, ql_dagger_z) / p.zz();
  Eigen::VectorXcd b;
  if (skew) b = -p.space().partial_inner(0, E, Vector(E.col(0))) / p.zz();
  std::vector<double> dev(count), t(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto e = static_cast<Eigen::Index>(k);
    dev[k] = std::abs(ing.K.values[e] - a[e]);
    if (skew) dev[k] = std::max(dev[k], std::abs(ing.K.values[e] - b[e]));
    t[k] = ing.K.grid.node(k);
  }
  CheckResult r = judge("fdt2", dev, t, tol);
  r.note = skew ? "adjoint pairing and force autocorrelation" : "adjoint pairing";
  return r;
}

CheckResult verify_orthogonality(const ForceEnsemble& eta, const MoriProjection& p, double tol, double scale) {
  const auto& E = eta.frames;
  const Eigen::VectorXcd c = p.space().partial_inner(0, E, p.z());
  const Eigen::VectorXd n2 = p.space().partial_norm2(0, E);
  const double zn = std::sqrt(p.zz());
  std::vector<double> dev(static_cast<std::size_t>(E.cols())), t(dev.size());
  for (std::size_t k = 0; k < dev.size(); ++k) {
    const auto e = static_cast<Eigen::Index>(k);
    const double num = std::abs(c[e]);
    dev[k] = num == 0.0 ? 0.0
                      : num / (std::max(std::sqrt(std::max(n2[e], 0.0)), scale) * zn + std::numeric_limits<double>::min());
    t[k] = eta.grid.node(k);
  }
  return judge("orthogonality", dev, t, tol);
}

Series memory_equation_predict(Complex omega, const Series& K, Complex C0) {
  require_origin(K.grid);
  const std::size_t m = K.size();
  const double dt = K.grid.dt;
  const Complex denom = 1.0 - 0.5 * dt * (omega + 0.5 * dt * K[0]);
  if (std::abs(denom) < 1e-10) throw SingularStepError("memory_equation_predict: near-singular implicit step", 1);
  Series C = Series::zeros(K.grid);
  C[0] = C0;
  Complex F_prev = omega * C0;
  for (std::size_t n = 0; n + 1 < m; ++n) {
    const std::size_t n1 = n + 1;
    Complex mem = 0.5 * K[n1] * C[0];
    for (std::size_t j = 1; j < n1; ++j) mem += K[n1 - j] * C[j];
    mem *= dt;
    C[n1] = (C[n] + 0.5 * dt * (F_prev + mem)) / denom;
    F_prev = omega * C[n1] + mem + 0.5 * dt * K[0] * C[n1];
  }
  return C;
}

}  // namespace mgle::mori
