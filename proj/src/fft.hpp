#pragma once

// Thin FFTW wrapper. Planning goes through a global mutex (the FFTW planner
// is not thread-safe); execution is re-entrant.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nlnoise::detail {

/// Forward real-to-complex transform, n/2 + 1 bins, unnormalized.
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// Inverse of rfft for a length-n signal, normalized by 1/n.
std::vector<double> irfft(std::span<const std::complex<double>> spec,
                          std::size_t n);

}  // namespace nlnoise::detail
