#include "mgle/trajectory.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "mgle/error.hpp"
#include "mgle/parallel.hpp"

namespace mgle::trajectory {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::size_t kBlock = 4096;

// Scratch space that stays on the stack for the small state dimensions used in practice.
template <class T>
class Scratch {
 public:
  explicit Scratch(std::size_t n) : n_(n) {
    if (n > kInline) heap_.resize(n);
  }
  std::span<T> span() noexcept { return {n_ > kInline ? heap_.data() : inline_.data(), n_}; }
  T& operator[](std::size_t i) noexcept { return span()[i]; }

 private:
  static constexpr std::size_t kInline = 16;
  std::size_t n_;
  std::array<T, kInline> inline_{};
  std::vector<T> heap_;
};

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& C, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (C.rows() != C.cols() || llt.info() != Eigen::Success)
    throw ConstructionError(std::string(what) + " is not symmetric positive definite");
  return llt.matrixL();
}

void apply_reversal(const SamplerSpec& s, const Eigen::VectorXd& mean, Eigen::MatrixXd& X) {
  if (s.reversal.size() == 0) return;
  if (s.reversal.size() != X.rows()) throw DimensionError("reversal signs", X.rows(), s.reversal.size());
  for (Eigen::Index i = 1; i < X.cols(); i += 2)
    X.col(i) = mean + s.reversal.cwiseProduct(X.col(i - 1) - mean);
}

SampleSet sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& Lc, const SamplerSpec& s,
                          std::size_t N, std::uint64_t seed) {
  const Eigen::Index n = Lc.rows();
  SampleSet out;
  out.states.resize(n, static_cast<Eigen::Index>(N));
  const bool paired = s.reversal.size() > 0;
  parallel_for(N, [&](std::size_t i) {
    if (paired && i % 2 == 1) return;
    std::mt19937_64 rng(splitmix(seed ^ (paired ? i / 2 : i)));
    std::normal_distribution<double> normal;
    Eigen::VectorXd xi(n);
    for (Eigen::Index d = 0; d < n; ++d) xi[d] = normal(rng);
    out.states.col(static_cast<Eigen::Index>(i)) = mean + Lc * xi;
  });
  apply_reversal(s, mean, out.states);
  return out;
}

SampleSet sample_metropolis(const SystemSpec& spec, std::size_t N, std::uint64_t seed) {
  const SamplerSpec& s = spec.sampler;
  const auto n = static_cast<Eigen::Index>(spec.dim);
  if (!spec.log_rho) throw ConstructionError("metropolis sampling needs log_rho");
  if (!(s.proposal_scale > 0.0)) throw ConstructionError("metropolis proposal scale must be positive");
  std::mt19937_64 rng(splitmix(seed));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::VectorXd x = s.start.size() ? s.start : Eigen::VectorXd::Zero(n);
  if (x.size() != n) throw DimensionError("metropolis start", spec.dim, x.size());
  double lp = spec.log_rho({x.data(), spec.dim});
  if (!std::isfinite(lp)) throw ConstructionError("metropolis start has non-finite log density");

  SampleSet out;
  out.states.resize(n, static_cast<Eigen::Index>(N));
  auto& diag = out.diagnostics;
  Eigen::VectorXd y(n);
  auto step = [&] {
    for (Eigen::Index d = 0; d < n; ++d) y[d] = x[d] + s.proposal_scale * normal(rng);
    ++diag.proposals;
    const double ly = spec.log_rho({y.data(), spec.dim});
    if (!std::isfinite(ly)) {
      ++diag.nonfinite;
      ++diag.rejections;
      return;
    }
    if (std::log(unif(rng)) < ly - lp) {
      x = y;
      lp = ly;
    } else {
      ++diag.rejections;
    }
  };
  for (std::size_t b = 0; b < s.burn_in; ++b) step();
  const bool paired = s.reversal.size() > 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (paired && i % 2 == 1) continue;
    if (i > 0)
      for (std::size_t t = 0; t <= s.thinning; ++t) step();
    out.states.col(static_cast<Eigen::Index>(i)) = x;
  }
  const Eigen::VectorXd mean = s.mean.size() ? s.mean : Eigen::VectorXd::Zero(n);
  apply_reversal(s, mean, out.states);
  diag.warning = diag.proposals > 0 && 10 * diag.rejections > 9 * diag.proposals;
  return out;
}

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("trajectory dump is truncated");
  return v;
}

Complex checked(Complex v, std::size_t sample, const std::string& name) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw NonFiniteError("observable " + name + " is not finite at sample " + std::to_string(sample));
  return v;
}

}  // namespace

SampleSet sample_initial(const SystemSpec& spec, std::size_t N, std::uint64_t seed) {
  if (N == 0) throw ConstructionError("need at least one sample");
  const SamplerSpec& s = spec.sampler;
  const auto n = static_cast<Eigen::Index>(spec.dim);
  const Eigen::VectorXd mean = s.mean.size() ? s.mean : Eigen::VectorXd::Zero(n);
  if (mean.size() != n) throw DimensionError("sampler mean", spec.dim, mean.size());
  switch (s.kind) {
    case SamplerSpec::Kind::gaussian:
      if (s.covariance.rows() != n) throw DimensionError("sampler covariance", spec.dim, s.covariance.rows());
      return sample_gaussian(mean, cholesky_lower(s.covariance, "covariance"), s, N, seed);
    case SamplerSpec::Kind::gibbs_quadratic: {
      if (s.hamiltonian.rows() != n) throw DimensionError("quadratic Hamiltonian", spec.dim, s.hamiltonian.rows());
      if (!(s.beta > 0.0)) throw ConstructionError("inverse temperature must be positive");
      const Eigen::MatrixXd cov = (s.beta * s.hamiltonian).inverse();
      return sample_gaussian(mean, cholesky_lower(0.5 * (cov + cov.transpose()), "inverse Hamiltonian"), s, N, seed);
    }
    case SamplerSpec::Kind::metropolis:
      return sample_metropolis(spec, N, seed);
  }
  throw Error("unknown sampler kind");
}

TrajectoryEnsemble::TrajectoryEnsemble(std::size_t dim, std::size_t samples, TimeGrid grid, std::uint64_t seed)
    : dim_(dim), samples_(samples), grid_(grid), seed_(seed), data_(dim * samples * grid.count, 0.0) {
  if (dim == 0 || samples == 0) throw ConstructionError("trajectory ensemble needs dim >= 1 and N >= 1");
}

void TrajectoryEnsemble::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os.write("MGLE1", 5);
  put<std::uint64_t>(os, dim_);
  put<std::uint64_t>(os, samples_);
  put<std::uint64_t>(os, grid_.count);
  put<double>(os, grid_.dt);
  std::vector<double> buf(samples_);
  for (std::size_t d = 0; d < dim_; ++d)
    for (std::size_t k = 0; k < grid_.count; ++k) {
      for (std::size_t i = 0; i < samples_; ++i) buf[i] = state(i, k)[d];
      os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    }
  if (!os) throw Error("failed writing " + path);
}

TrajectoryEnsemble TrajectoryEnsemble::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open trajectory dump " + path);
  char magic[5];
  if (!is.read(magic, 5) || std::memcmp(magic, "MGLE1", 5) != 0) throw Error(path + " is not an MGLE1 trajectory dump");
  const auto n = get<std::uint64_t>(is);
  const auto N = get<std::uint64_t>(is);
  const auto count = get<std::uint64_t>(is);
  const auto dt = get<double>(is);
  TrajectoryEnsemble ens(n, N, TimeGrid(0.0, dt, count), 0);
  std::vector<double> buf(N);
  for (std::size_t d = 0; d < n; ++d)
    for (std::size_t k = 0; k < count; ++k) {
      if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(N * sizeof(double))))
        throw Error("trajectory dump " + path + " is truncated");
      for (std::size_t i = 0; i < N; ++i) ens.state(i, k)[d] = buf[i];
    }
  return ens;
}

TrajectoryEnsemble integrate_flow(const SystemSpec& spec, const Eigen::MatrixXd& initials, const TimeGrid& grid,
                                  std::size_t substeps, std::uint64_t seed) {
  if (substeps < 1) throw ConstructionError("substeps must be at least 1");
  if (static_cast<std::size_t>(initials.rows()) != spec.dim)
    throw DimensionError("initial states", spec.dim, initials.rows());
  const std::size_t n = spec.dim, N = static_cast<std::size_t>(initials.cols());
  TrajectoryEnsemble ens(n, N, grid, seed);
  const double h = grid.dt / static_cast<double>(substeps);

  auto field = [&spec, n](std::size_t count, const double* X, double* out) {
    if (spec.F_batch) {
      spec.F_batch(count, X, out);
      return;
    }
    for (std::size_t b = 0; b < count; ++b) spec.F({X + b * n, n}, {out + b * n, n});
  };

  constexpr std::size_t lane = 256;
  parallel_for((N + lane - 1) / lane, [&](std::size_t b) {
    const std::size_t lo = b * lane, cnt = std::min(N, lo + lane) - lo, len = cnt * n;
    std::vector<double> x(len), k1(len), k2(len), k3(len), k4(len), tmp(len);
    for (std::size_t i = 0; i < cnt; ++i)
      for (std::size_t d = 0; d < n; ++d)
        x[i * n + d] = initials(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(lo + i));
    for (std::size_t i = 0; i < cnt; ++i) std::copy_n(x.data() + i * n, n, ens.state(lo + i, 0).begin());
    for (std::size_t k = 1; k < grid.count; ++k) {
      for (std::size_t sub = 0; sub < substeps; ++sub) {
        field(cnt, x.data(), k1.data());
        for (std::size_t e = 0; e < len; ++e) tmp[e] = x[e] + 0.5 * h * k1[e];
        field(cnt, tmp.data(), k2.data());
        for (std::size_t e = 0; e < len; ++e) tmp[e] = x[e] + 0.5 * h * k2[e];
        field(cnt, tmp.data(), k3.data());
        for (std::size_t e = 0; e < len; ++e) tmp[e] = x[e] + h * k3[e];
        field(cnt, tmp.data(), k4.data());
        for (std::size_t e = 0; e < len; ++e) x[e] += h / 6.0 * (k1[e] + 2.0 * k2[e] + 2.0 * k3[e] + k4[e]);
      }
      for (std::size_t e = 0; e < len; ++e)
        if (!std::isfinite(x[e])) {
          std::ostringstream msg;
          msg << "non-finite state in sample " << lo + e / n << " at t = " << grid.node(k);
          throw NonFiniteError(msg.str());
        }
      for (std::size_t i = 0; i < cnt; ++i) std::copy_n(x.data() + i * n, n, ens.state(lo + i, k).begin());
    }
  });
  return ens;
}

Series estimate_correlation(const TrajectoryEnsemble& ens, const ObservableSpec& x, const ObservableSpec& y,
                            const Eigen::VectorXd& weights) {
  const std::size_t N = ens.samples(), count = ens.grid().count;
  if (weights.size() != 0 && static_cast<std::size_t>(weights.size()) != N) throw DimensionError("weights", N, weights.size());
  const double uniform = 1.0 / static_cast<double>(N);
  std::vector<Eigen::VectorXcd> parts(block_count(N));
  parallel_for(parts.size(), [&](std::size_t b) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(count));
    const std::size_t lo = b * kBlock, hi = std::min(N, lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const double w = weights.size() ? weights[static_cast<Eigen::Index>(i)] : uniform;
      const Complex y0 = std::conj(checked(y.value(ens.state(i, 0)), i, y.name)) * w;
      for (std::size_t k = 0; k < count; ++k)
        acc[static_cast<Eigen::Index>(k)] += checked(x.value(ens.state(i, k)), i, x.name) * y0;
    }
    parts[b] = std::move(acc);
  });
  Series out = Series::zeros(ens.grid());
  for (const auto& p : parts) out.values += p;
  return out;
}

void fd_gradient(const std::function<Complex(State)>& f, State x, std::span<Complex> out) {
  const double eps = std::cbrt(std::numeric_limits<double>::epsilon());
  Scratch<double> buf(x.size());
  auto y = buf.span();
  std::copy(x.begin(), x.end(), y.begin());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = eps * (1.0 + std::abs(x[i]));
    y[i] = x[i] + h;
    const Complex fp = f(State(y));
    y[i] = x[i] - h;
    const Complex fm = f(State(y));
    y[i] = x[i];
    out[i] = (fp - fm) / (2.0 * h);
  }
}

ObservableSpec apply_generator(const SystemSpec& spec, const ObservableSpec& obs, bool fd_fallback) {
  if (!obs.gradient && !fd_fallback)
    throw Error("observable " + obs.name + " has no gradient and the finite-difference fallback is disabled");
  ObservableSpec out;
  out.name = "L(" + obs.name + ")";
  const std::size_t n = spec.dim;
  auto F = spec.F;
  auto value = obs.value;
  auto grad = obs.gradient;
  out.value = [n, F, value, grad](State x) -> Complex {
    Scratch<double> fb(n);
    Scratch<Complex> gb(n);
    auto f = fb.span();
    auto g = gb.span();
    F(x, f);
    if (grad)
      grad(x, g);
    else
      fd_gradient(value, x, g);
    Complex acc{0.0, 0.0};
    for (std::size_t d = 0; d < n; ++d) acc += f[d] * g[d];
    return acc;
  };
  if (obs.gradient && obs.hessian && spec.jacobian) {
    auto hess = obs.hessian;
    auto jac = spec.jacobian;
    // d_j (F . grad z) = sum_i J_ij d_i z + sum_i F_i H_ij
    out.gradient = [n, F, grad, hess, jac](State x, std::span<Complex> out_grad) {
      Scratch<double> fb(n), Jb(n * n);
      Scratch<Complex> gb(n), Hb(n * n);
      auto f = fb.span();
      auto J = Jb.span();
      auto g = gb.span();
      auto H = Hb.span();
      F(x, f);
      jac(x, J);
      grad(x, g);
      hess(x, H);
      for (std::size_t j = 0; j < n; ++j) {
        Complex acc{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) acc += J[i * n + j] * g[i] + f[i] * H[i * n + j];
        out_grad[j] = acc;
      }
    };
  }
  return out;
}

namespace {

double divergence(const SystemSpec& spec, State x) {
  if (spec.divF) return spec.divF(x);
  const double eps = std::cbrt(std::numeric_limits<double>::epsilon());
  std::vector<double> y(x.begin(), x.end()), fp(spec.dim), fm(spec.dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.dim; ++i) {
    const double h = eps * (1.0 + std::abs(x[i]));
    y[i] = x[i] + h;
    spec.F(y, fp);
    y[i] = x[i] - h;
    spec.F(y, fm);
    y[i] = x[i];
    acc += (fp[i] - fm[i]) / (2.0 * h);
  }
  return acc;
}

// div F + F . grad log rho, i.e. rho^{-1} div(rho F)
double compressibility(const SystemSpec& spec, State x) {
  std::vector<double> f(spec.dim), g(spec.dim);
  spec.F(x, f);
  if (spec.grad_log_rho) {
    spec.grad_log_rho(x, g);
  } else {
    if (!spec.log_rho) throw Error("system " + spec.name + " has neither grad_log_rho nor log_rho");
    std::vector<Complex> gc(spec.dim);
    fd_gradient([&](State y) { return Complex(spec.log_rho(y), 0.0); }, x, gc);
    for (std::size_t d = 0; d < spec.dim; ++d) g[d] = gc[d].real();
  }
  double acc = divergence(spec, x);
  for (std::size_t d = 0; d < spec.dim; ++d) acc += f[d] * g[d];
  return acc;
}

}  // namespace

Complex adjoint_generator_value(const SystemSpec& spec, const ObservableSpec& z, State x) {
  Scratch<double> fb(spec.dim);
  Scratch<Complex> gb(spec.dim);
  auto f = fb.span();
  auto g = gb.span();
  spec.F(x, f);
  if (z.gradient)
    z.gradient(x, g);
  else
    fd_gradient(z.value, x, g);
  Complex lz{0.0, 0.0};
  for (std::size_t d = 0; d < spec.dim; ++d) lz += f[d] * g[d];
  return -lz - compressibility(spec, x) * z.value(x);
}

Omega0Estimate estimate_omega0(const SystemSpec& spec, const Eigen::MatrixXd& samples) {
  const auto N = static_cast<std::size_t>(samples.cols());
  if (N == 0) throw Error("estimate_omega0: no samples");
  if (static_cast<std::size_t>(samples.rows()) != spec.dim) throw DimensionError("omega0 samples", spec.dim, samples.rows());
  std::vector<double> v(N);
  parallel_for(N, [&](std::size_t i) {
    v[i] = 0.5 * std::abs(compressibility(spec, {samples.col(static_cast<Eigen::Index>(i)).data(), spec.dim}));
  });
  Omega0Estimate est;
  const std::size_t decile = std::max<std::size_t>(1, N / 10);
  std::size_t arg = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (!std::isfinite(v[i])) throw NonFiniteError("omega0 summand is not finite at sample " + std::to_string(i));
    if (v[i] > v[arg]) arg = i;
    if (i + 1 == decile) est.first_decile_max = v[arg];
  }
  est.value = v[arg];
  est.location = samples.col(static_cast<Eigen::Index>(arg));
  est.flagged_unbounded = est.value > 1.1 * est.first_decile_max + 1e-9;
  return est;
}

CheckResult check_isometry(const TrajectoryEnsemble& ens, const ObservableSpec& x, const ObservableSpec& y, double tol,
                           const Eigen::VectorXd& weights) {
  const std::size_t N = ens.samples(), count = ens.grid().count;
  if (weights.size() != 0 && static_cast<std::size_t>(weights.size()) != N) throw DimensionError("weights", N, weights.size());
  const double uniform = 1.0 / static_cast<double>(N);
  std::vector<Eigen::VectorXcd> parts(block_count(N));
  parallel_for(parts.size(), [&](std::size_t b) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(count));
    const std::size_t lo = b * kBlock, hi = std::min(N, lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const double w = weights.size() ? weights[static_cast<Eigen::Index>(i)] : uniform;
      for (std::size_t k = 0; k < count; ++k) {
        const State s = ens.state(i, k);
        acc[static_cast<Eigen::Index>(k)] += w * checked(x.value(s), i, x.name) * std::conj(checked(y.value(s), i, y.name));
      }
    }
    parts[b] = std::move(acc);
  });
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(count));
  for (const auto& p : parts) c += p;
  std::vector<double> dev(count), t(count);
  for (std::size_t k = 0; k < count; ++k) {
    dev[k] = std::abs(c[static_cast<Eigen::Index>(k)] - c[0]);
    t[k] = ens.grid().node(k);
  }
  return judge("isometry", dev, t, tol);
}

double isometry_tolerance(const TrajectoryEnsemble& ens, const ObservableSpec& x, const ObservableSpec& y) {
  const std::size_t N = ens.samples();
  Complex mean{0.0, 0.0};
  std::vector<Complex> v(N);
  for (std::size_t i = 0; i < N; ++i) {
    const State s = ens.state(i, 0);
    v[i] = x.value(s) * std::conj(y.value(s));
    mean += v[i];
  }
  mean /= static_cast<double>(N);
  double var = 0.0;
  for (const auto& a : v) var += std::norm(a - mean);
  var /= static_cast<double>(std::max<std::size_t>(N, 2) - 1);
  return 5.0 * std::sqrt(var) / std::sqrt(static_cast<double>(N));
}

EnsembleDynamics::EnsembleDynamics(std::shared_ptr<const TrajectoryEnsemble> ens, SystemSpec spec, Pairing pairing)
    : ens_(std::move(ens)), spec_(std::move(spec)), pairing_(pairing) {
  if (!ens_) throw ConstructionError("ensemble dynamics needs an ensemble");
  if (ens_->dim() != spec_.dim) throw DimensionError("ensemble state dimension", spec_.dim, ens_->dim());
  if (ens_->grid().t0 != 0.0) throw Error("autonomous constructions need a grid starting at t0 = 0");
  const std::size_t N = ens_->samples();
  proj_ = std::make_unique<mori::MoriProjection>(hilbert::Space::uniform_ensemble(N), evaluate(spec_.z));

  ldag_z_.resize(static_cast<Eigen::Index>(N));
  parallel_for(N, [&](std::size_t i) {
    ldag_z_[static_cast<Eigen::Index>(i)] = adjoint_generator_value(spec_, spec_.z, ens_->state(i, 0));
  });

  const ObservableSpec lz = apply_generator(spec_, spec_.z);
  z_orbit_ = make_orbit(spec_.z, &lz);
  const ObservableSpec llz = apply_generator(spec_, lz);
  lz_orbit_ = make_orbit(lz, &llz);
}

Vector EnsembleDynamics::evaluate(const ObservableSpec& obs) const {
  const std::size_t N = ens_->samples();
  Vector v(static_cast<Eigen::Index>(N));
  parallel_for(N, [&](std::size_t i) { v[static_cast<Eigen::Index>(i)] = checked(obs.value(ens_->state(i, 0)), i, obs.name); });
  return v;
}

mori::Orbit EnsembleDynamics::make_orbit(const ObservableSpec& x, const ObservableSpec* lx) const {
  mori::Orbit o;
  o.initial = evaluate(x);
  auto ens = ens_;
  auto value = x.value;
  auto name = x.name;
  o.frames = [ens, value, name](std::size_t first, std::size_t rows) -> Matrix {
    const std::size_t count = ens->grid().count;
    Matrix F(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(count));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t k = 0; k < count; ++k)
        F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = checked(value(ens->state(first + r, k)), first + r, name);
    return F;
  };
  if (pairing_ == Pairing::generator) {
    o.corr = estimate_correlation(*ens_, x, spec_.z);
    o.pair = estimate_correlation(*ens_, lx ? *lx : apply_generator(spec_, x), spec_.z);
  } else {
    mori::fill_series(*this, o, ldag_z_);
  }
  return o;
}

mori::Orbit EnsembleDynamics::orbit(const ObservableSpec& x) const { return make_orbit(x, nullptr); }

}  // namespace mgle::trajectory
