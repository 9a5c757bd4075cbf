#pragma once

// Value types shared by every module: sampled waveforms, the single-tone
// excitation, circuit descriptions, harmonics and noise transfer pairs.
// All quantities are SI (V, A, S, F, rad/s, Hz, s).

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nlnoise {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Uniformly sampled real waveform.
struct TimeSeries {
  std::vector<double> samples;
  double sample_rate = 1.0;  // Hz
  double start_time = 0.0;   // s

  TimeSeries() = default;
  TimeSeries(std::vector<double> s, double fs, double t0 = 0.0);

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] bool empty() const { return samples.empty(); }
  [[nodiscard]] double dt() const { return 1.0 / sample_rate; }
  [[nodiscard]] double time(std::size_t n) const {
    return start_time + static_cast<double>(n) / sample_rate;
  }
  [[nodiscard]] double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  [[nodiscard]] std::span<const double> view() const { return samples; }

  /// Copy of samples [first, first + count).
  [[nodiscard]] TimeSeries slice(std::size_t first, std::size_t count) const;
  /// Drops `fraction` of the samples at each end.
  [[nodiscard]] TimeSeries trimmed(double fraction) const;
};

[[nodiscard]] double mean(std::span<const double> x);
[[nodiscard]] double rms(std::span<const double> x);
[[nodiscard]] double variance(std::span<const double> x);

/// v(t) = amplitude * cos(omega0 * t).
struct Excitation {
  double amplitude = 0.0;  // V1
  double omega0 = 1.0;     // rad/s

  [[nodiscard]] double frequency() const { return omega0 / kTwoPi; }
  void validate() const;
};

// Circuit families. Coefficients follow the conventions
//   conductance  i = g1 v + g2 v^2
//   capacitance  i = (C0 + C1 v) dv/dt

/// Output-input law x_o = alpha1 x_i + alpha2 x_i^2 (also g1, g2 conductance).
struct Memoryless {
  double alpha1 = 1.0;
  double alpha2 = 0.0;
};

/// Linear capacitor in parallel with a purely quadratic conductance.
struct LinCapNonlinG {
  double C0 = 0.0;
  double g2 = 0.0;
};

/// Linear conductance in parallel with a purely nonlinear capacitor.
struct LinGNonlinCap {
  double g1 = 0.0;
  double C1 = 0.0;
};

/// Series R driving C0 || g2 v^2.
struct RcNonlinG {
  double R = 0.0;
  double C0 = 0.0;
  double g2 = 0.0;
};

/// Series R driving C(v) = C0 + C1 v.
struct RcNonlinC {
  double R = 0.0;
  double C0 = 0.0;
  double C1 = 0.0;
};

/// Series R driving C(v) = C0 + C1 v in parallel with g2 v^2.
struct RcNonlinGC {
  double R = 0.0;
  double C0 = 0.0;
  double g2 = 0.0;
  double C1 = 0.0;
};

using CircuitSpec = std::variant<Memoryless, LinCapNonlinG, LinGNonlinCap,
                                 RcNonlinG, RcNonlinC, RcNonlinGC>;

[[nodiscard]] std::string_view circuit_name(const CircuitSpec& spec);
/// Throws InvalidArgument on non-finite or out-of-range parameters.
void validate(const CircuitSpec& spec);
/// True for the three series-RC families.
[[nodiscard]] bool is_rc_family(const CircuitSpec& spec);
/// The RC families expressed as the general RcNonlinGC form.
[[nodiscard]] RcNonlinGC as_rc_gc(const CircuitSpec& spec);

struct Harmonic {
  int order = 0;
  double amplitude = 0.0;  // >= 0
  double phase = 0.0;      // (-pi, pi]

  /// Signed value of a dc term (amplitude * cos(phase)).
  [[nodiscard]] double signed_dc() const;
};

/// Builds a harmonic from a possibly negative amplitude, folding the sign
/// into the phase.
[[nodiscard]] Harmonic make_harmonic(int order, double amplitude, double phase);

/// AM/PM transfer pair per unit input noise (1/V or 1/A).
struct NoiseTransfer {
  std::complex<double> h_am{};
  std::complex<double> h_pm{};
};

/// samples[n] = V1 cos(omega0 n / fs), length round(duration * fs).
[[nodiscard]] TimeSeries synth_tone(const Excitation& exc, double sample_rate,
                                    double duration);

/// Maps phi into (-pi, pi].
[[nodiscard]] double wrap_phase(double phi);

}  // namespace nlnoise
