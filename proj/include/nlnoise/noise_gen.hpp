#pragma once

// Seedable synthesis of baseband noise records.
//
// Random numbers come from a counter-based generator so that any sample of
// any stream can be computed independently and the output is bit-identical
// across runs:
//
//   mix64(z)        = SplitMix64 finalizer
//   key(seed, s)    = mix64(seed ^ (0xD1B54A32D192ED03 * (s + 1)))
//   word(key, c)    = mix64(key + (c + 1) * 0x9E3779B97F4A7C15)
//
// Gaussian pair k of a stream uses words 2k and 2k+1 in a Box-Muller step:
//   u1 = ((word(2k) >> 11) + 1) * 2^-53        in (0, 1]
//   u2 =  (word(2k+1) >> 11) * 2^-53           in [0, 1)
//   n[2k] = r cos(2 pi u2), n[2k+1] = r sin(2 pi u2), r = sqrt(-2 ln u1)
//
// Stream 0 feeds white noise. Flicker stage i uses stream i + 1, with its
// first normal drawing the stationary initial state.

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "nlnoise/signal.hpp"

namespace nlnoise {

struct Seed {
  std::uint64_t value = 0;
};

/// One-sided white PSD in units^2/Hz.
struct White {
  double psd_level = 0.0;
};

/// psd_at_1hz / f between f_low and f_high, flat below f_low.
struct Flicker {
  double psd_at_1hz = 0.0;
  double f_low = 0.0;
  double f_high = 0.0;
};

/// Deterministic amplitude * cos(omega_m t) used as a two-tone probe.
struct SingleToneProbe {
  double amplitude = 0.0;
  double omega_m = 0.0;
};

using NoiseModel = std::variant<White, Flicker, SingleToneProbe>;

class CounterRng {
 public:
  CounterRng(Seed seed, std::uint64_t stream);

  [[nodiscard]] std::uint64_t word(std::uint64_t counter) const;
  /// Standard normal number with index `i` of this stream.
  [[nodiscard]] double normal(std::uint64_t i) const;
  /// Fills `out` with normals i0, i0+1, ...
  void fill_normal(std::uint64_t i0, std::span<double> out) const;

 private:
  std::uint64_t key_;
};

[[nodiscard]] std::uint64_t mix64(std::uint64_t z);

/// First-order lowpass stage y[n] = a y[n-1] + b w[n] with unit-variance w.
struct FlickerStage {
  double corner_hz = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Log-spaced bank of lowpass stages summing to an approximate 1/f PSD.
struct FlickerBank {
  std::vector<FlickerStage> stages;
  double sample_rate = 0.0;

  /// Exact one-sided PSD of the summed discrete-time process.
  [[nodiscard]] double psd(double freq) const;
};

/// Corners at most half a decade apart spanning [f_low, f_high]; weights
/// calibrated so that psd() tracks psd_at_1hz / f over the band interior.
[[nodiscard]] FlickerBank design_flicker(const Flicker& model,
                                         double sample_rate);

[[nodiscard]] TimeSeries generate(const NoiseModel& model, Seed seed,
                                  double sample_rate, std::size_t n_samples);

/// Reference PSD; throws InvalidArgument for SingleToneProbe (line spectrum)
/// and for frequencies outside a Flicker band.
[[nodiscard]] double theoretical_psd(const NoiseModel& model, double freq);

}  // namespace nlnoise
