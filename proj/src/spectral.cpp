#include "nlnoise/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "fft.hpp"
#include "nlnoise/error.hpp"

namespace nlnoise {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Indices of bins with f_lo <= f <= f_hi.
std::pair<std::size_t, std::size_t> band_range(const PsdEstimate& psd,
                                               double f_lo, double f_hi) {
  if (!(f_hi > f_lo)) throw InvalidArgument("band requires f_hi > f_lo");
  const auto first = std::lower_bound(psd.freqs.begin(), psd.freqs.end(), f_lo);
  const auto last = std::upper_bound(psd.freqs.begin(), psd.freqs.end(), f_hi);
  if (first >= last) throw InvalidArgument("band contains no frequency bins");
  return {static_cast<std::size_t>(first - psd.freqs.begin()),
          static_cast<std::size_t>(last - psd.freqs.begin())};
}

}  // namespace

double PsdEstimate::integrated_power() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * df();
}

std::vector<double> make_window(const std::string& name, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (name == "rectangular") return w;
  // Periodic forms, which sum exactly under 50% overlap.
  const double denom = static_cast<double>(n);
  if (name == "hann") {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / denom);
    }
    return w;
  }
  if (name == "hamming") {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.54 - 0.46 * std::cos(kTwoPi * static_cast<double>(i) / denom);
    }
    return w;
  }
  throw InvalidArgument("unknown window '" + name + "'");
}

PsdEstimate welch_psd(const TimeSeries& x, std::size_t segment_len,
                      double overlap_frac, const std::string& window) {
  const std::size_t n = x.size();
  if (n == 0) throw InvalidArgument("welch_psd: empty signal");
  if (!is_power_of_two(segment_len)) {
    throw InvalidArgument("welch_psd: segment length must be a power of two");
  }
  if (segment_len > n) {
    throw InvalidArgument("welch_psd: segment longer than signal");
  }
  if (!(overlap_frac >= 0.0 && overlap_frac <= 0.9)) {
    throw InvalidArgument("welch_psd: overlap must lie in [0, 0.9]");
  }

  const std::vector<double> w = make_window(window, segment_len);
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  for (double v : w) {
    sum_w += v;
    sum_w2 += v * v;
  }
  const double fs = x.sample_rate;
  const auto overlap = static_cast<std::size_t>(
      std::llround(overlap_frac * static_cast<double>(segment_len)));
  const std::size_t step = std::max<std::size_t>(1, segment_len - overlap);
  const std::size_t n_seg = (n - segment_len) / step + 1;

  const double m = mean(x.view());
  const std::size_t n_bins = segment_len / 2 + 1;
  std::vector<double> acc(n_bins, 0.0);
  std::vector<double> buf(segment_len);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const std::size_t off = s * step;
    for (std::size_t i = 0; i < segment_len; ++i) {
      buf[i] = (x.samples[off + i] - m) * w[i];
    }
    const auto spec = detail::rfft(buf);
    for (std::size_t k = 0; k < n_bins; ++k) acc[k] += std::norm(spec[k]);
  }

  PsdEstimate out;
  out.sample_rate = fs;
  out.segment_len = segment_len;
  out.n_segments = n_seg;
  out.window_name = window;
  out.enbw = fs * sum_w2 / (sum_w * sum_w);
  out.freqs.resize(n_bins);
  out.values.resize(n_bins);
  const double scale = 1.0 / (fs * sum_w2 * static_cast<double>(n_seg));
  for (std::size_t k = 0; k < n_bins; ++k) {
    out.freqs[k] = static_cast<double>(k) * fs / static_cast<double>(segment_len);
    const bool edge = (k == 0) || (k == segment_len / 2);
    out.values[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

std::size_t default_segment_len(std::size_t n_samples,
                                 std::size_t min_segments) {
  std::size_t len = 1;
  while (len * 2 <= n_samples) len *= 2;
  while (len > 1) {
    const std::size_t step = len / 2;
    if (n_samples >= len && (n_samples - len) / step + 1 >= min_segments) {
      return len;
    }
    len /= 2;
  }
  throw InvalidArgument("record too short for the requested segment count");
}

AutocorrEstimate autocorrelation(const TimeSeries& x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n == 0) throw InvalidArgument("autocorrelation: empty signal");
  if (!(2 * max_lag < n)) {
    throw InvalidArgument("autocorrelation: max_lag must be < N/2");
  }
  const double m = mean(x.view());
  const std::size_t nfft = next_power_of_two(2 * n);
  std::vector<double> padded(nfft, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[i] = x.samples[i] - m;
  auto spec = detail::rfft(padded);
  for (auto& c : spec) c = std::norm(c);
  const auto r = detail::irfft(spec, nfft);

  AutocorrEstimate out;
  out.lags.resize(max_lag + 1);
  out.values.resize(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    out.lags[k] = static_cast<double>(k) / x.sample_rate;
    out.values[k] = r[k] / static_cast<double>(n);
  }
  return out;
}

double psd_ratio_check(const PsdEstimate& out_psd, const PsdEstimate& in_psd,
                       double f_lo, double f_hi) {
  if (out_psd.freqs.size() != in_psd.freqs.size() ||
      out_psd.sample_rate != in_psd.sample_rate ||
      out_psd.segment_len != in_psd.segment_len) {
    throw InvalidArgument("psd_ratio_check: incompatible frequency grids");
  }
  const auto [first, last] = band_range(in_psd, f_lo, f_hi);
  double log_sum = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    if (!(in_psd.values[k] > 0.0)) {
      throw InvalidArgument("psd_ratio_check: zero input PSD in band");
    }
    if (!(out_psd.values[k] > 0.0)) {
      throw InvalidArgument("psd_ratio_check: zero output PSD in band");
    }
    log_sum += std::log(out_psd.values[k] / in_psd.values[k]);
  }
  return std::exp(log_sum / static_cast<double>(last - first));
}

double log_log_slope(const PsdEstimate& psd, double f_lo, double f_hi,
                     std::size_t n_bands) {
  if (!(f_lo > 0.0) || !(f_hi > f_lo) || n_bands < 2) {
    throw InvalidArgument("log_log_slope: invalid band");
  }
  std::vector<double> lx;
  std::vector<double> ly;
  const double ratio = std::log(f_hi / f_lo) / static_cast<double>(n_bands);
  for (std::size_t b = 0; b < n_bands; ++b) {
    const double lo = f_lo * std::exp(ratio * static_cast<double>(b));
    const double hi = f_lo * std::exp(ratio * static_cast<double>(b + 1));
    double s = 0.0;
    double lf = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
      if (psd.freqs[k] >= lo && psd.freqs[k] < hi && psd.values[k] > 0.0) {
        s += psd.values[k];
        lf += std::log10(psd.freqs[k]);
        ++count;
      }
    }
    if (count == 0) continue;
    lx.push_back(lf / static_cast<double>(count));
    ly.push_back(std::log10(s / static_cast<double>(count)));
  }
  if (lx.size() < 2) {
    throw InvalidArgument("log_log_slope: fewer than two populated bands");
  }
  const double mx = mean(lx);
  const double my = mean(ly);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

double band_mean(const PsdEstimate& psd, double f_lo, double f_hi) {
  const auto [first, last] = band_range(psd, f_lo, f_hi);
  double s = 0.0;
  for (std::size_t k = first; k < last; ++k) s += psd.values[k];
  return s / static_cast<double>(last - first);
}

}  // namespace nlnoise
