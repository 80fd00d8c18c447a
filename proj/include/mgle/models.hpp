#pragma once

#include <cstddef>
#include <cstdint>

#include "mgle/hilbert.hpp"
#include "mgle/nonstationary.hpp"

namespace mgle::models {

/// Complex Gaussian matrix with entry variance 1/n, shifted so that its spectral abscissa is -dissipation.
Matrix random_generator(std::size_t n, std::uint64_t seed, double dissipation);

/// i H with H the Hermitian part of a complex Gaussian matrix of entry variance 1/n.
Matrix random_skew_generator(std::size_t n, std::uint64_t seed);

/// Random Hermitian positive-definite weight B^H B + I / 2 (B Gaussian with entry variance 1/n).
Matrix random_weight(std::size_t n, std::uint64_t seed);

/// Complex Gaussian vector normalized to unit Euclidean length.
Vector random_vector(std::size_t n, std::uint64_t seed);

/// L(t) = [[0, 1], [-(w2 + a sin t), 0]].
nonstationary::Generator driven_oscillator(double w2 = 4.0, double a = 1.0);

}  // namespace mgle::models
