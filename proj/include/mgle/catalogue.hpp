#pragma once

#include <string>
#include <vector>

#include "mgle/trajectory.hpp"

namespace mgle::trajectory::catalogue {

/// x_i
ObservableSpec coordinate(std::size_t index, std::size_t dim);
/// prod_i x_i^{e_i}, total degree at most 4.
ObservableSpec monomial(const std::vector<unsigned>& exponents);
ObservableSpec product(const ObservableSpec& a, const ObservableSpec& b, std::size_t dim);
ObservableSpec linear_combination(const std::vector<std::pair<Complex, ObservableSpec>>& terms, std::size_t dim);

/// H(q, p) = p^2/2 + omega^2 q^2/2 with Gibbs density at inverse temperature beta; z = q.
/// With `reversal_pairs` every other sample is the momentum-reversed copy of its predecessor.
SystemSpec harmonic_oscillator(double omega, double beta, bool reversal_pairs = true);

/// F(x) = A x with a Gaussian sampler of the given covariance; z = x_0.
SystemSpec linear_system(const Eigen::MatrixXd& A, const Eigen::MatrixXd& covariance);

/// F = 1 on the line with the logistic density rho(x) ~ e^{-x}/(1+e^{-x})^2, sampled by Metropolis.
SystemSpec logistic_drift();

/// F(x, y) = (-y, x) with a standard Gaussian density; z = x.
SystemSpec rotation();

/// F(x) = -x paired with the oscillator's Gibbs density: the density is not invariant.
SystemSpec dissipative_mismatch(double omega, double beta);

}  // namespace mgle::trajectory::catalogue
