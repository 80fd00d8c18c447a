#include "mgle/catalogue.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mgle/error.hpp"

namespace mgle::trajectory::catalogue {

ObservableSpec coordinate(std::size_t index, std::size_t dim) {
  if (index >= dim) throw ConstructionError("coordinate index out of range");
  ObservableSpec o;
  o.name = "x" + std::to_string(index);
  o.value = [index](State x) { return Complex(x[index], 0.0); };
  o.gradient = [index](State x, std::span<Complex> g) {
    for (std::size_t d = 0; d < x.size(); ++d) g[d] = d == index ? 1.0 : 0.0;
  };
  o.hessian = [](State, std::span<Complex> h) { std::fill(h.begin(), h.end(), Complex(0.0, 0.0)); };
  return o;
}

ObservableSpec monomial(const std::vector<unsigned>& e) {
  unsigned degree = 0;
  for (unsigned v : e) degree += v;
  if (degree > 4) throw ConstructionError("monomial degree above 4");
  ObservableSpec o;
  o.name = "mono";
  for (unsigned v : e) o.name += std::to_string(v);
  o.value = [e](State x) {
    double acc = 1.0;
    for (std::size_t d = 0; d < e.size(); ++d) acc *= std::pow(x[d], static_cast<double>(e[d]));
    return Complex(acc, 0.0);
  };
  o.gradient = [e](State x, std::span<Complex> g) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i >= e.size() || e[i] == 0) {
        g[i] = 0.0;
        continue;
      }
      double acc = e[i] * std::pow(x[i], static_cast<double>(e[i] - 1));
      for (std::size_t d = 0; d < e.size(); ++d)
        if (d != i) acc *= std::pow(x[d], static_cast<double>(e[d]));
      g[i] = acc;
    }
  };
  o.hessian = [e](State x, std::span<Complex> h) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 1.0;
        for (std::size_t d = 0; d < n; ++d) {
          const unsigned p = d < e.size() ? e[d] : 0;
          const unsigned k = (d == i) + (d == j);
          if (k > p) {
            acc = 0.0;
            break;
          }
          double c = 1.0;
          for (unsigned m = 0; m < k; ++m) c *= static_cast<double>(p - m);
          acc *= c * std::pow(x[d], static_cast<double>(p - k));
        }
        h[i * n + j] = acc;
      }
  };
  return o;
}

ObservableSpec product(const ObservableSpec& a, const ObservableSpec& b, std::size_t dim) {
  ObservableSpec o;
  o.name = a.name + "*" + b.name;
  o.value = [a, b](State x) { return a.value(x) * b.value(x); };
  if (a.gradient && b.gradient) {
    o.gradient = [a, b, dim](State x, std::span<Complex> g) {
      std::vector<Complex> ga(dim), gb(dim);
      a.gradient(x, ga);
      b.gradient(x, gb);
      const Complex va = a.value(x), vb = b.value(x);
      for (std::size_t d = 0; d < dim; ++d) g[d] = ga[d] * vb + va * gb[d];
    };
  }
  return o;
}

ObservableSpec linear_combination(const std::vector<std::pair<Complex, ObservableSpec>>& terms, std::size_t dim) {
  ObservableSpec o;
  o.name = "lincomb";
  o.value = [terms](State x) {
    Complex acc{0.0, 0.0};
    for (const auto& [c, t] : terms) acc += c * t.value(x);
    return acc;
  };
  bool all = true;
  for (const auto& term : terms) all = all && static_cast<bool>(term.second.gradient);
  if (all) {
    o.gradient = [terms, dim](State x, std::span<Complex> g) {
      std::vector<Complex> gt(dim);
      for (std::size_t d = 0; d < dim; ++d) g[d] = 0.0;
      for (const auto& [c, t] : terms) {
        t.gradient(x, gt);
        for (std::size_t d = 0; d < dim; ++d) g[d] += c * gt[d];
      }
    };
  }
  return o;
}

namespace {

void gibbs_oscillator_density(SystemSpec& s, double omega, double beta) {
  const double w2 = omega * omega;
  s.log_rho = [w2, beta](State x) { return -beta * (0.5 * x[1] * x[1] + 0.5 * w2 * x[0] * x[0]); };
  s.grad_log_rho = [w2, beta](State x, std::span<double> g) {
    g[0] = -beta * w2 * x[0];
    g[1] = -beta * x[1];
  };
  s.sampler.kind = SamplerSpec::Kind::gibbs_quadratic;
  s.sampler.hamiltonian = Eigen::Vector2d(w2, 1.0).asDiagonal();
  s.sampler.beta = beta;
}

}  // namespace

SystemSpec harmonic_oscillator(double omega, double beta, bool reversal_pairs) {
  if (!(omega > 0.0) || !(beta > 0.0)) throw ConstructionError("oscillator needs omega > 0 and beta > 0");
  SystemSpec s;
  s.name = "harmonic_oscillator";
  s.dim = 2;
  const double w2 = omega * omega;
  s.F = [w2](State x, std::span<double> f) {
    f[0] = x[1];
    f[1] = -w2 * x[0];
  };
  s.F_batch = [w2](std::size_t count, const double* X, double* out) {
    for (std::size_t b = 0; b < count; ++b) {
      out[2 * b] = X[2 * b + 1];
      out[2 * b + 1] = -w2 * X[2 * b];
    }
  };
  s.jacobian = [w2](State, std::span<double> J) {
    J[0] = 0.0;
    J[1] = 1.0;
    J[2] = -w2;
    J[3] = 0.0;
  };
  s.divF = [](State) { return 0.0; };
  gibbs_oscillator_density(s, omega, beta);
  if (reversal_pairs) s.sampler.reversal = Eigen::Vector2d(1.0, -1.0);
  s.z = coordinate(0, 2);
  s.z.name = "q";
  return s;
}

SystemSpec linear_system(const Eigen::MatrixXd& A, const Eigen::MatrixXd& covariance) {
  if (A.rows() != A.cols() || A.rows() == 0) throw ConstructionError("linear system matrix must be square");
  const auto n = static_cast<std::size_t>(A.rows());
  SystemSpec s;
  s.name = "linear";
  s.dim = n;
  s.F = [A, n](State x, std::span<double> f) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[j];
      f[i] = acc;
    }
  };
  s.F_batch = [A, n](std::size_t count, const double* X, double* out) {
    const Eigen::Map<const Eigen::MatrixXd> in(X, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
    Eigen::Map<Eigen::MatrixXd>(out, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count)).noalias() = A * in;
  };
  s.jacobian = [A, n](State, std::span<double> J) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) J[i * n + j] = A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  const double tr = A.trace();
  s.divF = [tr](State) { return tr; };
  const Eigen::MatrixXd P = covariance.inverse();
  s.log_rho = [P, n](State x) {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(n));
    return -0.5 * v.dot(P * v);
  };
  s.grad_log_rho = [P, n](State x, std::span<double> g) {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd r = -P * v;
    for (std::size_t i = 0; i < n; ++i) g[i] = r[static_cast<Eigen::Index>(i)];
  };
  s.sampler.kind = SamplerSpec::Kind::gaussian;
  s.sampler.covariance = covariance;
  s.z = coordinate(0, n);
  return s;
}

SystemSpec logistic_drift() {
  SystemSpec s;
  s.name = "logistic_drift";
  s.dim = 1;
  s.F = [](State, std::span<double> f) { f[0] = 1.0; };
  s.jacobian = [](State, std::span<double> J) { J[0] = 0.0; };
  s.divF = [](State) { return 0.0; };
  // log(e^{-x}/(1+e^{-x})^2) = -|x| - 2 log(1 + e^{-|x|}), symmetric in x
  s.log_rho = [](State x) {
    const double a = std::abs(x[0]);
    return -a - 2.0 * std::log1p(std::exp(-a));
  };
  s.grad_log_rho = [](State x, std::span<double> g) { g[0] = -std::tanh(0.5 * x[0]); };
  s.sampler.kind = SamplerSpec::Kind::metropolis;
  s.sampler.proposal_scale = 2.5;
  s.sampler.burn_in = 2000;
  s.sampler.thinning = 4;
  s.z = coordinate(0, 1);
  return s;
}

SystemSpec rotation() {
  SystemSpec s;
  s.name = "rotation";
  s.dim = 2;
  s.F = [](State x, std::span<double> f) {
    f[0] = -x[1];
    f[1] = x[0];
  };
  s.F_batch = [](std::size_t count, const double* X, double* out) {
    for (std::size_t b = 0; b < count; ++b) {
      out[2 * b] = -X[2 * b + 1];
      out[2 * b + 1] = X[2 * b];
    }
  };
  s.jacobian = [](State, std::span<double> J) {
    J[0] = 0.0;
    J[1] = -1.0;
    J[2] = 1.0;
    J[3] = 0.0;
  };
  s.divF = [](State) { return 0.0; };
  s.log_rho = [](State x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); };
  s.grad_log_rho = [](State x, std::span<double> g) {
    g[0] = -x[0];
    g[1] = -x[1];
  };
  s.sampler.kind = SamplerSpec::Kind::gaussian;
  s.sampler.covariance = Eigen::Matrix2d::Identity();
  s.z = coordinate(0, 2);
  return s;
}

SystemSpec dissipative_mismatch(double omega, double beta) {
  SystemSpec s;
  s.name = "dissipative_mismatch";
  s.dim = 2;
  s.F = [](State x, std::span<double> f) {
    f[0] = -x[0];
    f[1] = -x[1];
  };
  s.F_batch = [](std::size_t count, const double* X, double* out) {
    for (std::size_t e = 0; e < 2 * count; ++e) out[e] = -X[e];
  };
  s.jacobian = [](State, std::span<double> J) {
    J[0] = -1.0;
    J[1] = 0.0;
    J[2] = 0.0;
    J[3] = -1.0;
  };
  s.divF = [](State) { return -2.0; };
  gibbs_oscillator_density(s, omega, beta);
  s.z = coordinate(0, 2);
  s.z.name = "q";
  return s;
}

}  // namespace mgle::trajectory::catalogue
