#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlnoise/signal.hpp"

namespace nlnoise {

/// One-sided PSD estimate (units^2/Hz).
struct PsdEstimate {
  std::vector<double> freqs;   // Hz, ascending from 0
  std::vector<double> values;  // units^2/Hz
  std::size_t n_segments = 0;
  std::size_t segment_len = 0;
  std::string window_name;
  double enbw = 0.0;           // Hz
  double sample_rate = 0.0;

  [[nodiscard]] double df() const {
    return sample_rate / static_cast<double>(segment_len);
  }
  /// Sum of values * df, i.e. the variance the estimate accounts for.
  [[nodiscard]] double integrated_power() const;
};

struct AutocorrEstimate {
  std::vector<double> lags;    // s
  std::vector<double> values;  // units^2
};

/// Window names accepted by welch_psd: "hann", "hamming", "rectangular".
[[nodiscard]] std::vector<double> make_window(const std::string& name,
                                              std::size_t n);

/// Welch estimate with density normalization. The record mean is removed
/// first. segment_len must be a power of two no longer than the record.
[[nodiscard]] PsdEstimate welch_psd(const TimeSeries& x,
                                    std::size_t segment_len,
                                    double overlap_frac = 0.5,
                                    const std::string& window = "hann");

/// Largest power-of-two segment that yields at least `min_segments` Hann
/// segments at 50% overlap.
[[nodiscard]] std::size_t default_segment_len(std::size_t n_samples,
                                              std::size_t min_segments = 32);

/// Biased (1/N) autocorrelation of the mean-removed record for lags
/// 0..max_lag.
[[nodiscard]] AutocorrEstimate autocorrelation(const TimeSeries& x,
                                               std::size_t max_lag);

/// Geometric mean over [f_lo, f_hi] of out/in: an empirical |H|^2.
[[nodiscard]] double psd_ratio_check(const PsdEstimate& out_psd,
                                     const PsdEstimate& in_psd, double f_lo,
                                     double f_hi);

/// Least-squares slope of log10(S) against log10(f) over [f_lo, f_hi],
/// after averaging bins into `n_bands` log-spaced bands.
[[nodiscard]] double log_log_slope(const PsdEstimate& psd, double f_lo,
                                   double f_hi, std::size_t n_bands = 20);

/// Mean of the estimate over [f_lo, f_hi].
[[nodiscard]] double band_mean(const PsdEstimate& psd, double f_lo,
                               double f_hi);

}  // namespace nlnoise
