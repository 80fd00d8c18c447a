#include "mgle/orthdyn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgle/error.hpp"

namespace mgle::orthdyn {

namespace {

Matrix projector(const mori::MoriProjection& p) {
  // P x = (x, z)/(z, z) z = z z^H W x / (z, z)
  const hilbert::Space& sp = p.space();
  return p.z() * (sp.weight() * p.z()).adjoint() / p.zz();
}

double node_norm(const hilbert::Space& space, const Vector& v) { return space.norm(v); }

}  // namespace

OrbitMap orbit(const mori::Dynamics& dyn, const mori::Orbit& xo) {
  const auto& p = dyn.projection();
  const TimeGrid& grid = dyn.grid();
  const double zz = p.zz();
  const Complex w = dyn.omega();
  const Complex c = p.coefficient(xo.initial);
  const auto& zo = dyn.z_orbit();

  // pairings of U(t)Qx = U(t)x - c U(t)z
  const Eigen::VectorXcd corr = xo.corr.values - c * zo.corr.values;
  const Eigen::VectorXcd pair = xo.pair.values - c * zo.pair.values;
  const Series drive(grid, (pair - w * corr) / zz);
  const Series h(grid, (zo.pair.values - w * zo.corr.values) / zz);

  OrbitMap out;
  out.x = xo.initial;
  out.grid = grid;
  out.f = volterra::solve_convolution(drive, h);

  const std::size_t dim = dyn.space().dim();
  const Matrix Z = zo.frames(0, dim);
  const Matrix X = xo.frames(0, dim);
  out.u = X - c * Z - mori::apply_memory(Z, out.f);
  out.u.colwise() += c * p.z();
  out.u.col(0) = xo.initial;
  return out;
}

OrbitMap orbit(const mori::MatrixDynamics& dyn, const Vector& x) { return orbit(dyn, dyn.orbit(x)); }

CheckResult check_dyson(const linops::OperatorModel& model, const mori::MoriProjection& p, const TimeGrid& grid,
                        double tol) {
  const auto n = static_cast<Eigen::Index>(model.dim());
  const Matrix P = projector(p);
  const Matrix Q = Matrix::Identity(n, n) - P;
  const Matrix& L = model.generator();
  const Matrix QLQ = Q * L * Q;
  const Matrix LQ = L * Q;
  double rate = 0.0;
  if (tol < 0.0) {
    const linops::OperatorModel qlq(model.space(), QLQ);
    rate = std::abs(linops::growth_bound(qlq, std::max(grid.t_max(), grid.dt), 51).omega);
  }
  std::vector<double> dev(grid.count), t(grid.count);
  double worst_ratio = -1.0;
  CheckResult r;
  r.name = "dyson";
  r.status = Status::pass;
  for (std::size_t k = 0; k < grid.count; ++k) {
    t[k] = grid.node(k);
    const Matrix lhs = linops::expm(QLQ * t[k]);
    const Matrix rhs = P + Q * linops::expm(LQ * t[k]);
    dev[k] = linops::operator_norm(model.space(), lhs - rhs);
    const double bound = tol < 0.0 ? 1e-10 * std::exp(rate * std::abs(t[k])) : tol;
    const double ratio = dev[k] / bound;
    if (!std::isfinite(ratio) || ratio > worst_ratio) {
      worst_ratio = ratio;
      r.max_deviation = dev[k];
      r.tolerance = bound;
      r.t = t[k];
    }
    if (!(dev[k] <= bound)) r.status = Status::fail;
  }
  if (tol < 0.0) r.note = "tolerance 1e-10 exp(" + std::to_string(rate) + " t)";
  return r;
}

CheckResult check_unitarity(const linops::OperatorModel& model, const mori::MoriProjection& p, const TimeGrid& grid,
                            double tol) {
  const auto n = static_cast<Eigen::Index>(model.dim());
  const Matrix Q = Matrix::Identity(n, n) - projector(p);
  const Matrix QLQ = Q * model.generator() * Q;
  const Matrix& W = model.space().weight();
  std::vector<double> dev(grid.count), t(grid.count);
  for (std::size_t k = 0; k < grid.count; ++k) {
    t[k] = grid.node(k);
    const Matrix G = linops::expm(QLQ * t[k]);
    Eigen::JacobiSVD<Matrix> svd(G.adjoint() * W * G - W);
    dev[k] = svd.singularValues()[0];
  }
  return judge("unitarity", dev, t, tol);
}

CheckResult check_semigroup(const OrbitFactory& factory, const hilbert::Space& space, const Vector& x, double t,
                            double s, double tol) {
  const OrbitMap first = factory(x);
  const std::size_t kt = first.grid.index_of(first.grid.t0 + t);
  const std::size_t ks = first.grid.index_of(first.grid.t0 + s);
  const std::size_t kts = first.grid.index_of(first.grid.t0 + t + s);
  const Vector mid = first.u.col(static_cast<Eigen::Index>(kt));
  const OrbitMap second = factory(mid);
  const Vector diff = first.u.col(static_cast<Eigen::Index>(kts)) - second.u.col(static_cast<Eigen::Index>(ks));
  return judge("semigroup", {node_norm(space, diff)}, {t + s}, tol);
}

std::vector<Triple> stationarity_triples(std::size_t count) {
  if (count < 3) throw Error("stationarity needs at least three grid nodes");
  const std::size_t m1 = (count - 1) / 2;
  std::vector<Triple> out;
  out.reserve(20);
  for (std::size_t i = 0; i < 20; ++i) out.push_back({(i * 7) % m1, (i * 13) % m1, (i * 5 + 3) % m1});
  return out;
}

CheckResult check_stationarity(const mori::ForceEnsemble& eta, const hilbert::Space& space, double tol) {
  const auto& E = eta.frames;
  const auto col = [&](std::size_t k) { return Vector(E.col(static_cast<Eigen::Index>(k))); };
  std::vector<double> dev, t;
  CheckResult worst;
  std::size_t worst_i = 0;
  const auto triples = stationarity_triples(static_cast<std::size_t>(E.cols()));
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto [a, b, r] = triples[i];
    const Complex shifted = space.inner(col(a + r), col(b + r));
    const Complex base = space.inner(col(a), col(b));
    dev.push_back(std::abs(shifted - base));
    t.push_back(eta.grid.node(a));
    if (dev.back() >= dev[worst_i]) worst_i = i;
  }
  CheckResult res = judge("stationarity", dev, t, tol);
  const auto [a, b, r] = triples[worst_i];
  res.t = eta.grid.node(a);
  res.s = eta.grid.node(b);
  res.note = "shift r = " + std::to_string(eta.grid.node(r) - eta.grid.t0);
  return res;
}

CheckResult check_growth_bound(const OrbitMap& orbit, const linops::GrowthBound& gb, const hilbert::Space& space,
                               double ldagger_z_norm, double z_norm) {
  const double w = std::max(gb.omega, 0.0);
  const double xn = space.norm(orbit.x);
  std::vector<double> dev(orbit.grid.count), t(orbit.grid.count);
  for (std::size_t k = 0; k < orbit.grid.count; ++k) {
    t[k] = orbit.grid.node(k) - orbit.grid.t0;
    const double me = gb.M * std::exp(w * t[k]);
    const double bound = (1.0 + me) * xn * std::exp(t[k] * me * ldagger_z_norm / z_norm);
    const double un = space.norm(orbit.u.col(static_cast<Eigen::Index>(k)));
    // ratio of the norm to the bound; a value above 1 + 1e-8 violates the inequality
    dev[k] = bound > 0.0 ? un / bound : (un > 0.0 ? INFINITY : 0.0);
  }
  CheckResult r = judge("growth_bound", dev, t, 1.0 + 1e-8);
  r.note = "deviation is ||u(x,t)|| divided by the bound";
  return r;
}

double max_increment(const OrbitMap& orbit, const hilbert::Space& space) {
  double m = 0.0;
  for (Eigen::Index k = 1; k < orbit.u.cols(); ++k) m = std::max(m, space.norm(orbit.u.col(k) - orbit.u.col(k - 1)));
  return m;
}

}  // namespace mgle::orthdyn
