#include "nlnoise/noise_gen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "nlnoise/error.hpp"

namespace nlnoise {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamMul = 0xD1B54A32D192ED03ULL;
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

void check_count(std::size_t n) {
  if (n < 2) throw InvalidArgument("noise record needs at least 2 samples");
}

void check_rate(double fs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw InvalidArgument("sample_rate must be finite and > 0");
  }
}

void check_flicker(const Flicker& m, double fs) {
  if (!(m.psd_at_1hz > 0.0) || !std::isfinite(m.psd_at_1hz)) {
    throw InvalidArgument("flicker psd_at_1hz must be > 0");
  }
  if (!(m.f_low > 0.0 && m.f_low < m.f_high)) {
    throw InvalidArgument("flicker band requires 0 < f_low < f_high");
  }
  if (!(m.f_high < 0.5 * fs)) {
    throw SamplingError("flicker f_high must lie below Nyquist");
  }
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

CounterRng::CounterRng(Seed seed, std::uint64_t stream)
    : key_(mix64(seed.value ^ (kStreamMul * (stream + 1)))) {}

std::uint64_t CounterRng::word(std::uint64_t counter) const {
  return mix64(key_ + (counter + 1) * kGolden);
}

double CounterRng::normal(std::uint64_t i) const {
  const std::uint64_t pair = i / 2;
  const double u1 =
      static_cast<double>((word(2 * pair) >> 11) + 1) * kTwoPow53Inv;
  const double u2 = static_cast<double>(word(2 * pair + 1) >> 11) * kTwoPow53Inv;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = kTwoPi * u2;
  return (i % 2 == 0) ? r * std::cos(angle) : r * std::sin(angle);
}

void CounterRng::fill_normal(std::uint64_t i0, std::span<double> out) const {
  std::size_t k = 0;
  std::uint64_t i = i0;
  if (i % 2 == 1 && k < out.size()) out[k++] = normal(i++);
  for (; k + 1 < out.size(); k += 2, i += 2) {
    const std::uint64_t pair = i / 2;
    const double u1 =
        static_cast<double>((word(2 * pair) >> 11) + 1) * kTwoPow53Inv;
    const double u2 =
        static_cast<double>(word(2 * pair + 1) >> 11) * kTwoPow53Inv;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = kTwoPi * u2;
    out[k] = r * std::cos(angle);
    out[k + 1] = r * std::sin(angle);
  }
  if (k < out.size()) out[k] = normal(i);
}

double FlickerBank::psd(double freq) const {
  const double w = kTwoPi * freq / sample_rate;
  const std::complex<double> z = std::polar(1.0, -w);
  double acc = 0.0;
  for (const auto& s : stages) {
    acc += 2.0 * s.b * s.b / (sample_rate * std::norm(1.0 - s.a * z));
  }
  return acc;
}

FlickerBank design_flicker(const Flicker& model, double sample_rate) {
  check_rate(sample_rate);
  check_flicker(model, sample_rate);

  const double decades = std::log10(model.f_high / model.f_low);
  const auto n_stages =
      static_cast<std::size_t>(std::ceil(2.0 * decades - 1e-9)) + 1;
  const double step = std::log(model.f_high / model.f_low) /
                      static_cast<double>(n_stages - 1);
  // Sum of Lorentzians A_i / (1 + (f/fc_i)^2) with A_i = K / fc_i on a
  // log lattice of spacing `step` approximates K * pi / (2 step f).
  const double k = model.psd_at_1hz * 2.0 * step / kPi;

  FlickerBank bank;
  bank.sample_rate = sample_rate;
  for (std::size_t i = 0; i < n_stages; ++i) {
    const double fc = model.f_low * std::exp(step * static_cast<double>(i));
    const double one_minus_a = -std::expm1(-kTwoPi * fc / sample_rate);
    const double level = k / fc;
    bank.stages.push_back(
        {fc, 1.0 - one_minus_a, one_minus_a * std::sqrt(level * sample_rate / 2.0)});
  }

  // Calibrate against the 1/f reference over the band interior (half a
  // decade in from each edge when the band is wide enough).
  double lo = model.f_low;
  double hi = model.f_high;
  if (decades > 1.0) {
    lo *= std::sqrt(10.0);
    hi /= std::sqrt(10.0);
  }
  constexpr int kGrid = 64;
  double log_err = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double f = lo * std::pow(hi / lo, static_cast<double>(i) / (kGrid - 1));
    log_err += std::log((model.psd_at_1hz / f) / bank.psd(f));
  }
  const double gain = std::sqrt(std::exp(log_err / kGrid));
  for (auto& s : bank.stages) s.b *= gain;
  return bank;
}

TimeSeries generate(const NoiseModel& model, Seed seed, double sample_rate,
                    std::size_t n_samples) {
  check_rate(sample_rate);
  check_count(n_samples);
  std::vector<double> out(n_samples, 0.0);

  if (const auto* w = std::get_if<White>(&model)) {
    if (!(w->psd_level > 0.0) || !std::isfinite(w->psd_level)) {
      throw InvalidArgument("white psd_level must be > 0");
    }
    const double sigma = std::sqrt(w->psd_level * sample_rate / 2.0);
    CounterRng(seed, 0).fill_normal(0, out);
    for (double& v : out) v *= sigma;
  } else if (const auto* f = std::get_if<Flicker>(&model)) {
    const FlickerBank bank = design_flicker(*f, sample_rate);
    std::vector<double> w(n_samples);
    for (std::size_t i = 0; i < bank.stages.size(); ++i) {
      const auto& st = bank.stages[i];
      const CounterRng rng(seed, i + 1);
      const double stationary_sd = st.b / std::sqrt(1.0 - st.a * st.a);
      double y = stationary_sd * rng.normal(0);
      rng.fill_normal(1, w);
      for (std::size_t n = 0; n < n_samples; ++n) {
        y = st.a * y + st.b * w[n];
        out[n] += y;
      }
    }
  } else {
    const auto& p = std::get<SingleToneProbe>(model);
    if (!std::isfinite(p.amplitude) || !std::isfinite(p.omega_m) ||
        p.omega_m < 0.0) {
      throw InvalidArgument("probe amplitude and omega_m must be finite");
    }
    if (!(p.omega_m / kTwoPi < 0.5 * sample_rate)) {
      throw SamplingError("probe tone above Nyquist");
    }
    for (std::size_t n = 0; n < n_samples; ++n) {
      out[n] = p.amplitude *
               std::cos(p.omega_m * static_cast<double>(n) / sample_rate);
    }
  }
  return TimeSeries(std::move(out), sample_rate, 0.0);
}

double theoretical_psd(const NoiseModel& model, double freq) {
  if (!(freq > 0.0) || !std::isfinite(freq)) {
    throw InvalidArgument("frequency must be > 0");
  }
  if (const auto* w = std::get_if<White>(&model)) return w->psd_level;
  if (const auto* f = std::get_if<Flicker>(&model)) {
    if (freq < f->f_low || freq > f->f_high) {
      throw InvalidArgument("frequency outside the flicker band");
    }
    return f->psd_at_1hz / freq;
  }
  throw InvalidArgument("SingleToneProbe is a line spectrum with no PSD density");
}

}  // namespace nlnoise
