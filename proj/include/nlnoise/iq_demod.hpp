#pragma once

// Carrier-referenced decomposition of a waveform
//   x(t) = (X1 + n_I(t)) cos(w0 t + phi1) + n_Q(t) sin(w0 t + phi1) + v_BB(t)
// and the AM/PM processes a_n = n_I / X1, phi_n = -n_Q / X1.

#include <array>
#include <complex>
#include <cstddef>

#include "nlnoise/signal.hpp"

namespace nlnoise {

/// 4th-order Butterworth lowpass, bilinear-mapped with prewarping, run
/// forward and backward (zero phase, squared magnitude response).
class ZeroPhaseLowpass {
 public:
  static constexpr int kOrder = 4;

  ZeroPhaseLowpass(double cutoff_hz, double sample_rate);

  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
  /// |H(f)|^2 of the forward-backward pair.
  [[nodiscard]] double magnitude(double freq) const;
  [[nodiscard]] double cutoff() const { return cutoff_; }

 private:
  struct Biquad {
    double b0, b1, b2, a1, a2;
  };
  void run_forward(std::vector<double>& y) const;

  double cutoff_;
  double sample_rate_;
  std::size_t settle_ = 0;
  std::array<Biquad, 2> sections_{};
};

struct IqDecomposition {
  TimeSeries baseband;
  TimeSeries inphase;
  TimeSeries quadrature;
  double carrier_amp = 0.0;
  double carrier_phase = 0.0;
  double lp_cutoff = 0.0;
  int lp_order = ZeroPhaseLowpass::kOrder;
  std::size_t decimate = 1;
};

struct AmPmProcesses {
  TimeSeries a_n;
  TimeSeries phi_n;
  /// max|a_n| > 0.1 or max|phi_n| > 0.1 rad.
  bool large_deviation = false;
};

/// Complex amplitude X such that x ~ Re{X exp(j omega t)}, projected over
/// the whole record with absolute sample times.
[[nodiscard]] std::complex<double> tone_phasor(const TimeSeries& x,
                                               double omega);

/// Frequency-domain Hilbert transform (-j sign(w)); dc and Nyquist bins are
/// zeroed.
[[nodiscard]] TimeSeries hilbert_quadrature(const TimeSeries& x);

/// Decimation factor keeping the decimated rate >= 20 * lp_cutoff.
[[nodiscard]] std::size_t default_decimation(double sample_rate,
                                             double lp_cutoff);

/// Lock-in style I/Q demodulation around omega0. Carrier amplitude and
/// phase come from projection over the largest integer number of periods;
/// lp_cutoff defaults to f0/20 when <= 0 and decimate to
/// default_decimation() when 0.
[[nodiscard]] IqDecomposition lockin_decompose(const TimeSeries& x,
                                               double omega0,
                                               double lp_cutoff = 0.0,
                                               std::size_t decimate = 0);

[[nodiscard]] AmPmProcesses to_am_pm(const IqDecomposition& d);

/// AM and PM complex amplitudes at offset omega_m, referenced to the
/// carrier: a_n(t) = Re{am e^{j wm t}}, phi_n(t) = Re{pm e^{j wm t}}.
struct SidebandSplit {
  std::complex<double> am;
  std::complex<double> pm;
  std::complex<double> carrier;
};

/// Requires an integer number of periods of w0 - wm, w0 and w0 + wm in the
/// record.
[[nodiscard]] SidebandSplit sideband_split(const TimeSeries& x, double omega0,
                                           double omega_m);

}  // namespace nlnoise
