#include "nlnoise/iq_demod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fft.hpp"
#include "nlnoise/error.hpp"

namespace nlnoise {

namespace {

std::size_t full_period_samples(std::size_t n, double sample_rate,
                                double omega) {
  const double per_period = sample_rate * kTwoPi / omega;
  const double periods = std::floor(static_cast<double>(n) / per_period + 1e-9);
  if (periods < 1.0) {
    throw InvalidArgument("record shorter than one carrier period");
  }
  return std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround(periods * per_period)));
}

TimeSeries decimated(std::vector<double> y, double sample_rate,
                     double start_time, std::size_t factor) {
  std::vector<double> out;
  out.reserve(y.size() / factor + 1);
  for (std::size_t i = 0; i < y.size(); i += factor) out.push_back(y[i]);
  return TimeSeries(std::move(out), sample_rate / static_cast<double>(factor),
                    start_time);
}

bool is_integer_cycles(double cycles) {
  return std::abs(cycles - std::round(cycles)) < 1e-6;
}

}  // namespace

ZeroPhaseLowpass::ZeroPhaseLowpass(double cutoff_hz, double sample_rate)
    : cutoff_(cutoff_hz), sample_rate_(sample_rate) {
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate)) {
    throw InvalidArgument("lowpass cutoff must lie in (0, fs/2)");
  }
  // The slowest pole pair decays by about exp(-24) over this many samples.
  settle_ = static_cast<std::size_t>(std::ceil(10.0 * sample_rate / cutoff_hz));
  const double k = std::tan(kPi * cutoff_hz / sample_rate);
  // Butterworth pole-pair quality factors for order 4.
  const std::array<double, 2> q = {1.0 / (2.0 * std::cos(kPi / 8.0)),
                                   1.0 / (2.0 * std::cos(3.0 * kPi / 8.0))};
  for (std::size_t i = 0; i < 2; ++i) {
    const double norm = 1.0 / (1.0 + k / q[i] + k * k);
    Biquad s{};
    s.b0 = k * k * norm;
    s.b1 = 2.0 * s.b0;
    s.b2 = s.b0;
    s.a1 = 2.0 * (k * k - 1.0) * norm;
    s.a2 = (1.0 - k / q[i] + k * k) * norm;
    sections_[i] = s;
  }
}

void ZeroPhaseLowpass::run_forward(std::vector<double>& y) const {
  if (y.empty()) return;
  for (const auto& s : sections_) {
    // Steady state for a constant input equal to the local mean.
    const std::size_t head = std::min(y.size(), settle_);
    const double u = std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(head), 0.0) /
                     static_cast<double>(head);
    double z1 = (1.0 - s.b0) * u;
    double z2 = (s.b2 - s.a2) * u;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

std::vector<double> ZeroPhaseLowpass::apply(std::span<const double> x) const {
  const std::size_t n = x.size();
  if (n < 2) return {x.begin(), x.end()};
  // Mirror padding at both ends. Mixer products oscillate at 2 w0, so an
  // even reflection keeps the local mean where an odd one would add a step.
  const std::size_t pad = std::min(n - 1, settle_);
  std::vector<double> y;
  y.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) y.push_back(x[i]);
  y.insert(y.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) y.push_back(x[n - 1 - i]);
  run_forward(y);
  std::reverse(y.begin(), y.end());
  run_forward(y);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(pad),
          y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double ZeroPhaseLowpass::magnitude(double freq) const {
  const std::complex<double> z = std::polar(1.0, -kTwoPi * freq / sample_rate_);
  std::complex<double> h = 1.0;
  for (const auto& s : sections_) {
    h *= (s.b0 + s.b1 * z + s.b2 * z * z) / (1.0 + s.a1 * z + s.a2 * z * z);
  }
  return std::norm(h);
}

std::complex<double> tone_phasor(const TimeSeries& x, double omega) {
  if (x.empty()) throw InvalidArgument("tone_phasor: empty record");
  std::complex<double> acc = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    acc += x.samples[n] * std::polar(1.0, -omega * x.time(n));
  }
  return 2.0 * acc / static_cast<double>(x.size());
}

TimeSeries hilbert_quadrature(const TimeSeries& x) {
  const std::size_t n = x.size();
  if (n < 64) throw InvalidArgument("hilbert_quadrature: need >= 64 samples");
  auto spec = detail::rfft(x.samples);
  spec.front() = 0.0;
  const std::complex<double> minus_j(0.0, -1.0);
  for (std::size_t k = 1; k < spec.size(); ++k) spec[k] *= minus_j;
  if (n % 2 == 0) spec.back() = 0.0;
  return TimeSeries(detail::irfft(spec, n), x.sample_rate, x.start_time);
}

std::size_t default_decimation(double sample_rate, double lp_cutoff) {
  if (!(lp_cutoff > 0.0)) throw InvalidArgument("lp_cutoff must be > 0");
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(sample_rate / (20.0 * lp_cutoff))));
}

IqDecomposition lockin_decompose(const TimeSeries& x, double omega0,
                                 double lp_cutoff, std::size_t decimate) {
  if (!(omega0 > 0.0)) throw InvalidArgument("omega0 must be > 0");
  const double f0 = omega0 / kTwoPi;
  if (lp_cutoff <= 0.0) lp_cutoff = f0 / 20.0;
  if (!(lp_cutoff < f0 / 2.0)) {
    throw InvalidArgument("lp_cutoff must be below f0/2");
  }
  if (decimate == 0) decimate = default_decimation(x.sample_rate, lp_cutoff);

  const std::size_t n_use = full_period_samples(x.size(), x.sample_rate, omega0);
  const TimeSeries window = x.slice(0, n_use);
  const std::complex<double> carrier = tone_phasor(window, omega0);
  const double amp = std::abs(carrier);
  const double phase = std::arg(carrier);

  // Projection standard error from the residual left after the carrier.
  const double dc = mean(window.view());
  double resid2 = 0.0;
  for (std::size_t i = 0; i < n_use; ++i) {
    const double r = window.samples[i] - dc -
                     amp * std::cos(omega0 * window.time(i) + phase);
    resid2 += r * r;
  }
  const double floor = std::sqrt(resid2 / static_cast<double>(n_use)) *
                       std::sqrt(2.0 / static_cast<double>(n_use));
  if (!(amp > 0.0) || !(amp > 10.0 * floor)) {
    throw InvalidArgument("no detectable carrier at omega0");
  }

  // The projected carrier is removed before mixing. In the body this equals
  // 2 LP[x cos] - X1 up to the filter's 2 w0 leakage, while the record-edge
  // transients scale with the noise instead of the carrier.
  const std::size_t n = x.size();
  std::vector<double> resid(n);
  std::vector<double> mix_i(n);
  std::vector<double> mix_q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = omega0 * x.time(i) + phase;
    const double c = std::cos(theta);
    resid[i] = x.samples[i] - amp * c;
    mix_i[i] = 2.0 * resid[i] * c;
    mix_q[i] = 2.0 * resid[i] * std::sin(theta);
  }
  const ZeroPhaseLowpass lp(lp_cutoff, x.sample_rate);
  auto i_lp = lp.apply(mix_i);
  auto q_lp = lp.apply(mix_q);
  auto bb = lp.apply(resid);
  const double bb_mean = mean(bb);
  for (double& v : bb) v -= bb_mean;

  IqDecomposition d;
  d.carrier_amp = amp;
  d.carrier_phase = wrap_phase(phase);
  d.lp_cutoff = lp_cutoff;
  d.decimate = decimate;
  d.inphase = decimated(std::move(i_lp), x.sample_rate, x.start_time, decimate);
  d.quadrature =
      decimated(std::move(q_lp), x.sample_rate, x.start_time, decimate);
  d.baseband = decimated(std::move(bb), x.sample_rate, x.start_time, decimate);
  return d;
}

AmPmProcesses to_am_pm(const IqDecomposition& d) {
  if (!(d.carrier_amp > 0.0)) {
    throw InvalidArgument("to_am_pm: zero carrier amplitude");
  }
  AmPmProcesses p;
  p.a_n = d.inphase;
  p.phi_n = d.quadrature;
  double peak = 0.0;
  for (double& v : p.a_n.samples) {
    v /= d.carrier_amp;
    peak = std::max(peak, std::abs(v));
  }
  for (double& v : p.phi_n.samples) {
    v = -v / d.carrier_amp;
    peak = std::max(peak, std::abs(v));
  }
  p.large_deviation = peak > 0.1;
  return p;
}

SidebandSplit sideband_split(const TimeSeries& x, double omega0,
                             double omega_m) {
  if (!(omega0 > 0.0) || !(omega_m > 0.0) || !(omega_m < omega0)) {
    throw InvalidArgument("sideband_split requires 0 < omega_m < omega0");
  }
  const double span = x.duration();
  for (double w : {omega0 - omega_m, omega0, omega0 + omega_m}) {
    if (!is_integer_cycles(w * span / kTwoPi)) {
      throw InvalidArgument(
          "sideband_split: record does not hold integer periods of the tones");
    }
  }
  const std::complex<double> c = tone_phasor(x, omega0);
  if (std::abs(c) == 0.0) {
    throw InvalidArgument("sideband_split: no carrier");
  }
  const std::complex<double> upper = tone_phasor(x, omega0 + omega_m) / c;
  const std::complex<double> lower = tone_phasor(x, omega0 - omega_m) / c;
  // u = (am + j pm) / 2, conj(l) = (am - j pm) / 2.
  const std::complex<double> sum = upper + std::conj(lower);
  const std::complex<double> diff = upper - std::conj(lower);
  return {sum, std::complex<double>(0.0, -1.0) * diff, c};
}

}  // namespace nlnoise
