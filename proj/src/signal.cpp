#include "nlnoise/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlnoise/error.hpp"

namespace nlnoise {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be finite");
  }
}

void require_positive(double v, const char* what) {
  require_finite(v, what);
  if (!(v > 0.0)) throw InvalidArgument(std::string(what) + " must be > 0");
}

void require_non_negative(double v, const char* what) {
  require_finite(v, what);
  if (v < 0.0) throw InvalidArgument(std::string(what) + " must be >= 0");
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> s, double fs, double t0)
    : samples(std::move(s)), sample_rate(fs), start_time(t0) {
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw InvalidArgument("sample_rate must be finite and > 0");
  }
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const {
  if (first > samples.size() || count > samples.size() - first) {
    throw InvalidArgument("slice out of range");
  }
  std::vector<double> out(samples.begin() + static_cast<std::ptrdiff_t>(first),
                          samples.begin() +
                              static_cast<std::ptrdiff_t>(first + count));
  return TimeSeries(std::move(out), sample_rate, time(first));
}

TimeSeries TimeSeries::trimmed(double fraction) const {
  if (!(fraction >= 0.0 && fraction < 0.5)) {
    throw InvalidArgument("trim fraction must be in [0, 0.5)");
  }
  const auto cut = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(samples.size())));
  return slice(cut, samples.size() - 2 * cut);
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) /
         static_cast<double>(x.size());
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double variance(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size());
}

void Excitation::validate() const {
  require_finite(amplitude, "excitation amplitude");
  if (amplitude < 0.0) {
    throw InvalidArgument("excitation amplitude must be >= 0");
  }
  require_positive(omega0, "omega0");
}

std::string_view circuit_name(const CircuitSpec& spec) {
  return std::visit(
      overloaded{
          [](const Memoryless&) { return std::string_view("Memoryless"); },
          [](const LinCapNonlinG&) {
            return std::string_view("LinCapNonlinG");
          },
          [](const LinGNonlinCap&) {
            return std::string_view("LinGNonlinCap");
          },
          [](const RcNonlinG&) { return std::string_view("RcNonlinG"); },
          [](const RcNonlinC&) { return std::string_view("RcNonlinC"); },
          [](const RcNonlinGC&) { return std::string_view("RcNonlinGC"); },
      },
      spec);
}

void validate(const CircuitSpec& spec) {
  std::visit(overloaded{
                 [](const Memoryless& m) {
                   require_finite(m.alpha1, "alpha1");
                   require_finite(m.alpha2, "alpha2");
                 },
                 [](const LinCapNonlinG& c) {
                   require_non_negative(c.C0, "C0");
                   require_finite(c.g2, "g2");
                 },
                 [](const LinGNonlinCap& c) {
                   require_positive(c.g1, "g1");
                   require_finite(c.C1, "C1");
                 },
                 [](const RcNonlinG& c) {
                   require_positive(c.R, "R");
                   require_non_negative(c.C0, "C0");
                   require_finite(c.g2, "g2");
                 },
                 [](const RcNonlinC& c) {
                   require_positive(c.R, "R");
                   require_non_negative(c.C0, "C0");
                   require_finite(c.C1, "C1");
                 },
                 [](const RcNonlinGC& c) {
                   require_positive(c.R, "R");
                   require_non_negative(c.C0, "C0");
                   require_finite(c.g2, "g2");
                   require_finite(c.C1, "C1");
                 },
             },
             spec);
}

bool is_rc_family(const CircuitSpec& spec) {
  return std::holds_alternative<RcNonlinG>(spec) ||
         std::holds_alternative<RcNonlinC>(spec) ||
         std::holds_alternative<RcNonlinGC>(spec);
}

RcNonlinGC as_rc_gc(const CircuitSpec& spec) {
  if (const auto* g = std::get_if<RcNonlinG>(&spec)) {
    return {g->R, g->C0, g->g2, 0.0};
  }
  if (const auto* c = std::get_if<RcNonlinC>(&spec)) {
    return {c->R, c->C0, 0.0, c->C1};
  }
  if (const auto* gc = std::get_if<RcNonlinGC>(&spec)) return *gc;
  throw InvalidArgument(std::string(circuit_name(spec)) +
                        " is not a series-RC circuit");
}

double Harmonic::signed_dc() const { return amplitude * std::cos(phase); }

Harmonic make_harmonic(int order, double amplitude, double phase) {
  if (amplitude < 0.0) {
    amplitude = -amplitude;
    phase += kPi;
  }
  return {order, amplitude, wrap_phase(phase)};
}

TimeSeries synth_tone(const Excitation& exc, double sample_rate,
                      double duration) {
  exc.validate();
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InvalidArgument("duration must be > 0");
  }
  if (!(sample_rate >= 10.0 * exc.frequency())) {
    throw SamplingError("sample rate below 10 samples per carrier cycle");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  std::vector<double> out(n);
  const double dt = 1.0 / sample_rate;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = exc.amplitude * std::cos(exc.omega0 * static_cast<double>(i) * dt);
  }
  return TimeSeries(std::move(out), sample_rate, 0.0);
}

double wrap_phase(double phi) {
  double r = std::remainder(phi, kTwoPi);  // [-pi, pi]
  if (r <= -kPi) r += kTwoPi;
  return r;
}

}  // namespace nlnoise
