#include "mgle/volterra.hpp"

#include <cmath>
#include <string>

#include "mgle/error.hpp"

namespace mgle::volterra {

TimeGrid::TimeGrid(double t0_, double dt_, std::size_t count_) : t0(t0_), dt(dt_), count(count_) {
  if (!std::isfinite(t0) || !std::isfinite(dt) || !(dt > 0.0)) throw ConstructionError("time grid needs finite t0 and dt > 0");
  if (count < 2) throw ConstructionError("time grid needs at least two nodes");
}

TimeGrid TimeGrid::span(double t_max, double dt) {
  if (!(dt > 0.0) || !std::isfinite(t_max) || !(t_max > 0.0)) throw ConstructionError("grid span needs t_max > 0 and dt > 0");
  const double steps = std::round(t_max / dt);
  if (steps > 1e6) throw ConstructionError("grid would exceed 10^6 nodes");
  return TimeGrid(0.0, dt, static_cast<std::size_t>(steps) + 1);
}

std::size_t TimeGrid::index_of(double t) const {
  const double x = (t - t0) / dt;
  const double k = std::round(x);
  if (std::abs(x - k) > 1e-9 || k < 0.0 || k >= static_cast<double>(count))
    throw Error("time " + std::to_string(t) + " is not a node of the grid");
  return static_cast<std::size_t>(k);
}

bool TimeGrid::same_as(const TimeGrid& o) const noexcept {
  return count == o.count && std::abs(dt - o.dt) <= 1e-12 * dt && std::abs(t0 - o.t0) <= 1e-12 * (1.0 + std::abs(t0));
}

Series::Series(TimeGrid g, Eigen::VectorXcd v) : grid(g), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != grid.count) throw DimensionError("series length", grid.count, values.size());
}

Series Series::zeros(const TimeGrid& grid) {
  return Series(grid, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.count)));
}

Series Series::sample(const TimeGrid& grid, const std::function<Complex(double)>& f) {
  Series s = zeros(grid);
  for (std::size_t k = 0; k < grid.count; ++k) s[k] = f(grid.node(k));
  return s;
}

TwoTimeField::TwoTimeField(TimeGrid grid) : grid_(grid) {
  data_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.count * (grid.count + 1) / 2));
}

TwoTimeField TwoTimeField::sample(const TimeGrid& grid, const std::function<Complex(double, double)>& f) {
  TwoTimeField v(grid);
  for (std::size_t k = 0; k < grid.count; ++k)
    for (std::size_t j = 0; j <= k; ++j) v(k, j) = f(grid.node(k), grid.node(j));
  return v;
}

std::size_t TwoTimeField::offset(std::size_t k, std::size_t j) const {
  if (j > k || k >= grid_.count) throw Error("two-time index (" + std::to_string(k) + ", " + std::to_string(j) + ") outside the triangle");
  return k * (k + 1) / 2 + j;
}

Eigen::VectorXd quadrature_weights(std::size_t m, Rule rule) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + 1));
  if (m == 0) return w;
  if (rule == Rule::trapezoid || m == 1) {
    w.setOnes();
    w[0] = w[static_cast<Eigen::Index>(m)] = 0.5;
    return w;
  }
  const std::size_t even = m % 2 == 0 ? m : m - 3;
  for (std::size_t i = 0; i < even; i += 2) {
    const auto e = static_cast<Eigen::Index>(i);
    w[e] += 1.0 / 3.0;
    w[e + 1] += 4.0 / 3.0;
    w[e + 2] += 1.0 / 3.0;
  }
  if (m % 2 == 1) {
    const auto e = static_cast<Eigen::Index>(even);
    w[e] += 3.0 / 8.0;
    w[e + 1] += 9.0 / 8.0;
    w[e + 2] += 9.0 / 8.0;
    w[e + 3] += 3.0 / 8.0;
  }
  return w;
}

namespace {

void require_shared_origin_grid(const Series& a, const Series& b, const char* op) {
  if (!a.grid.same_as(b.grid)) throw Error(std::string(op) + ": series live on different grids");
  if (a.grid.t0 != 0.0) throw Error(std::string(op) + ": grid must start at t0 = 0");
}

}  // namespace

Series solve_convolution(const Series& g, const Series& h) {
  require_shared_origin_grid(g, h, "solve_convolution");
  const std::size_t m = g.size();
  const double dt = g.grid.dt;
  const Complex denom = 1.0 + 0.5 * dt * h[0];
  if (std::abs(denom) < 1e-10)
    throw SingularStepError("solve_convolution: near-singular implicit step, reduce dt", 1);

  Series K = Series::zeros(g.grid);
  K[0] = g[0];
  for (std::size_t n = 1; n < m; ++n) {
    Complex acc = 0.5 * K[0] * h[n];
    for (std::size_t j = 1; j < n; ++j) acc += K[n - j] * h[j];
    K[n] = (g[n] - dt * acc) / denom;
  }
  return K;
}

Series convolve(const Series& K, const Series& C) {
  require_shared_origin_grid(K, C, "convolve");
  const std::size_t m = K.size();
  const double dt = K.grid.dt;
  Series out = Series::zeros(K.grid);
  for (std::size_t n = 1; n < m; ++n) {
    Complex acc = 0.5 * (K[n] * C[0] + K[0] * C[n]);
    for (std::size_t j = 1; j < n; ++j) acc += K[n - j] * C[j];
    out[n] = dt * acc;
  }
  return out;
}

Eigen::VectorXcd solve_two_time(const TwoTimeField& G, const TwoTimeField& H, std::size_t k) {
  if (!G.grid().same_as(H.grid())) throw Error("solve_two_time: fields live on different grids");
  if (k >= G.grid().count) throw Error("solve_two_time: row " + std::to_string(k) + " outside the grid");
  const double dt = G.grid().dt;
  Eigen::VectorXcd K(static_cast<Eigen::Index>(k + 1));
  K[static_cast<Eigen::Index>(k)] = -G(k, k);
  for (std::size_t jj = k; jj-- > 0;) {
    const Complex denom = 1.0 - 0.5 * dt * H(jj, jj);
    if (std::abs(denom) < 1e-10)
      throw SingularStepError("solve_two_time: near-singular implicit step in row " + std::to_string(k) + ", reduce dt", k);
    Complex acc = 0.5 * K[static_cast<Eigen::Index>(k)] * H(k, jj);
    for (std::size_t r = jj + 1; r < k; ++r) acc += K[static_cast<Eigen::Index>(r)] * H(r, jj);
    K[static_cast<Eigen::Index>(jj)] = (-G(k, jj) + dt * acc) / denom;
  }
  return K;
}

}  // namespace mgle::volterra
