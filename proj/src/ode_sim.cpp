#include "nlnoise/ode_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "nlnoise/error.hpp"

namespace nlnoise {

namespace {

// Scalar charge-form model; see the header for the coefficient mapping.
struct ChargeModel {
  double q0 = 0.0;
  double q1 = 0.0;
  double lin = 1.0;
  double quad = 0.0;
  double u_gain = 1.0;
  double n_gain = 1.0;
  // Output map y = out1 v + out2 v^2.
  double out1 = 1.0;
  double out2 = 0.0;
};

ChargeModel charge_model(const SimCircuit& circuit) {
  ChargeModel m;
  if (const auto* b = std::get_if<BjtCircuit>(&circuit)) {
    b->eq.validate();
    const auto& c = b->eq.coeffs;
    const double rsum = b->eq.res.r_b + b->eq.res.r_e;
    m.q0 = rsum * c.c_pi0;
    m.q1 = rsum * c.c_pi1;
    m.lin = b->eq.k();
    m.quad = c.g_pi2 * rsum + c.g_m2 * b->eq.res.r_e;
    m.n_gain = -rsum;
    m.out1 = c.g_m1;
    m.out2 = c.g_m2;
    return m;
  }
  const RcNonlinGC c = as_rc_gc(std::get<CircuitSpec>(circuit));
  m.q0 = c.R * c.C0;
  m.q1 = c.R * c.C1;
  m.quad = c.g2 * c.R;
  return m;
}

bool integrates_ode(const SimCircuit& circuit) {
  if (std::holds_alternative<BjtCircuit>(circuit)) return true;
  return is_rc_family(std::get<CircuitSpec>(circuit));
}

// Injected noise on the integration grid, with an analytic form for the
// probe so that off-grid RK4 stages and derivatives are exact.
struct NoiseInput {
  const std::vector<double>* record = nullptr;
  std::optional<SingleToneProbe> probe;
  double fs = 1.0;

  [[nodiscard]] double at_index(std::size_t i) const {
    if (probe) {
      return probe->amplitude *
             std::cos(probe->omega_m * static_cast<double>(i) / fs);
    }
    return record ? (*record)[i] : 0.0;
  }
  [[nodiscard]] double at_time(double t) const {
    if (probe) return probe->amplitude * std::cos(probe->omega_m * t);
    if (!record) return 0.0;
    const double pos = t * fs;
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= record->size()) return record->back();
    const double f = pos - static_cast<double>(i);
    return (1.0 - f) * (*record)[i] + f * (*record)[i + 1];
  }
  [[nodiscard]] double derivative(std::size_t i) const {
    if (probe) {
      return -probe->amplitude * probe->omega_m *
             std::sin(probe->omega_m * static_cast<double>(i) / fs);
    }
    if (!record) return 0.0;
    const auto& r = *record;
    const std::size_t n = r.size();
    if (n < 2) return 0.0;
    if (i == 0) return (r[1] - r[0]) * fs;
    if (i + 1 >= n) return (r[n - 1] - r[n - 2]) * fs;
    return 0.5 * (r[i + 1] - r[i - 1]) * fs;
  }
  [[nodiscard]] double peak(std::size_t n) const {
    if (probe) return std::abs(probe->amplitude);
    if (!record) return 0.0;
    double p = 0.0;
    for (std::size_t i = 0; i < n; ++i) p = std::max(p, std::abs((*record)[i]));
    return p;
  }
};

std::string at_time_msg(const char* what, double t) {
  std::ostringstream os;
  os << what << " at t = " << t << " s";
  return os.str();
}

class ChargeIntegrator {
 public:
  ChargeIntegrator(const ChargeModel& m, const Excitation& exc,
                   const NoiseInput& noise, const SimConfig& cfg,
                   double guard_level, SimStats& stats)
      : m_(m), exc_(exc), noise_(noise), cfg_(cfg), h_(1.0 / cfg.sample_rate),
        guard_(guard_level), stats_(stats) {}

  std::vector<double> run(std::size_t n_total) {
    std::vector<double> v(n_total, 0.0);
    for (std::size_t i = 0; i + 1 < n_total; ++i) {
      v[i + 1] = cfg_.integrator == Integrator::kRk4 ? rk4_step(i, v[i])
                                                     : trap_step(i, v[i]);
      check(v[i + 1], static_cast<double>(i + 1) * h_);
      ++stats_.steps;
    }
    return v;
  }

 private:
  [[nodiscard]] double drive_index(std::size_t i) const {
    const double t = static_cast<double>(i) * h_;
    return m_.u_gain * exc_.amplitude * std::cos(exc_.omega0 * t) +
           m_.n_gain * noise_.at_index(i);
  }
  [[nodiscard]] double drive_time(double t) const {
    return m_.u_gain * exc_.amplitude * std::cos(exc_.omega0 * t) +
           m_.n_gain * noise_.at_time(t);
  }
  [[nodiscard]] double charge(double v) const {
    return m_.q0 * v + 0.5 * m_.q1 * v * v;
  }
  [[nodiscard]] double flow(double e, double v) const {
    return e - m_.lin * v - m_.quad * v * v;
  }

  double trap_step(std::size_t i, double vn) {
    const double half = 0.5 * h_;
    const double rhs = charge(vn) + half * (flow(drive_index(i), vn) +
                                            drive_index(i + 1));
    // G(v) = Q(v) + h/2 (lin v + quad v^2) - rhs
    auto resid = [&](double v) {
      return charge(v) + half * (m_.lin * v + m_.quad * v * v) - rhs;
    };
    const double scale = std::max(guard_ / 10.0, 1e-300);
    double v = vn;
    double g = resid(v);
    int it = 0;
    for (; it < cfg_.max_step_nonlin_iter; ++it) {
      if (g == 0.0) break;
      const double dg = m_.q0 + m_.q1 * v + half * (m_.lin + 2.0 * m_.quad * v);
      if (dg == 0.0 || !std::isfinite(dg)) break;
      double dv = -g / dg;
      double v_new = v + dv;
      double g_new = resid(v_new);
      for (int k = 0; k < 30 && std::abs(g_new) > std::abs(g); ++k) {
        dv *= 0.5;
        v_new = v + dv;
        g_new = resid(v_new);
      }
      v = v_new;
      g = g_new;
      if (std::abs(dv) <= cfg_.tol * std::max(std::abs(v), scale)) {
        ++it;
        break;
      }
    }
    stats_.newton_iterations += static_cast<std::size_t>(it);
    stats_.max_newton_iterations = std::max(stats_.max_newton_iterations, it);
    if (it >= cfg_.max_step_nonlin_iter && g != 0.0) {
      throw ConvergenceError(at_time_msg(
          "Newton iteration did not converge", static_cast<double>(i + 1) * h_));
    }
    return v;
  }

  [[nodiscard]] double slope(double t, double v) const {
    const double cap = m_.q0 + m_.q1 * v;
    if (!(cap > 0.05 * m_.q0)) {
      throw ConvergenceError(at_time_msg("capacitance guard violated", t));
    }
    return flow(drive_time(t), v) / cap;
  }

  [[nodiscard]] double rk4_step(std::size_t i, double vn) const {
    const double t = static_cast<double>(i) * h_;
    const double k1 = slope(t, vn);
    const double k2 = slope(t + 0.5 * h_, vn + 0.5 * h_ * k1);
    const double k3 = slope(t + 0.5 * h_, vn + 0.5 * h_ * k2);
    const double k4 = slope(t + h_, vn + h_ * k3);
    return vn + h_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  void check(double v, double t) const {
    if (!std::isfinite(v)) {
      throw ConvergenceError(at_time_msg("non-finite state", t));
    }
    if (guard_ > 0.0 && std::abs(v) > guard_) {
      throw ConvergenceError(at_time_msg("state exceeded divergence guard", t));
    }
    if (!(m_.q0 + m_.q1 * v >= 0.05 * m_.q0)) {
      throw ConvergenceError(at_time_msg("capacitance guard violated", t));
    }
  }

  const ChargeModel& m_;
  const Excitation& exc_;
  const NoiseInput& noise_;
  const SimConfig& cfg_;
  double h_;
  double guard_;
  SimStats& stats_;
};

// Output of the memoryless and single-element circuits from the input and
// its time derivative.
std::vector<double> algebraic_output(const CircuitSpec& spec,
                                     const Excitation& exc,
                                     const NoiseInput& noise, double fs,
                                     std::size_t n_total) {
  std::vector<double> y(n_total);
  for (std::size_t i = 0; i < n_total; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double u = exc.amplitude * std::cos(exc.omega0 * t) + noise.at_index(i);
    const double du = -exc.amplitude * exc.omega0 * std::sin(exc.omega0 * t) +
                      noise.derivative(i);
    if (const auto* m = std::get_if<Memoryless>(&spec)) {
      y[i] = m->alpha1 * u + m->alpha2 * u * u;
    } else if (const auto* c = std::get_if<LinCapNonlinG>(&spec)) {
      y[i] = c->C0 * du + c->g2 * u * u;
    } else {
      const auto& c2 = std::get<LinGNonlinCap>(spec);
      y[i] = c2.g1 * u + c2.C1 * u * du;
    }
  }
  return y;
}

std::vector<Harmonic> measure_harmonics(const TimeSeries& y, double omega0) {
  const double per_period = y.sample_rate * kTwoPi / omega0;
  const double periods =
      std::floor(static_cast<double>(y.size()) / per_period + 1e-9);
  if (periods < 1.0) return {};
  const auto n_use = std::min<std::size_t>(
      y.size(), static_cast<std::size_t>(std::llround(periods * per_period)));
  const TimeSeries w = y.slice(y.size() - n_use, n_use);
  std::vector<Harmonic> out;
  out.push_back(make_harmonic(0, mean(w.view()), 0.0));
  for (int k = 1; k <= 3; ++k) {
    const auto p = tone_phasor(w, k * omega0);
    out.push_back(make_harmonic(k, std::abs(p), std::arg(p)));
  }
  return out;
}

struct Grid {
  std::size_t n_total = 0;
  std::size_t n_skip = 0;
};

Grid grid_for(const SimConfig& cfg) {
  Grid g;
  g.n_total = static_cast<std::size_t>(std::llround(cfg.duration * cfg.sample_rate));
  g.n_skip = static_cast<std::size_t>(
      std::llround(cfg.transient_skip * cfg.sample_rate));
  return g;
}

SimResult run(const SimCircuit& circuit, const Excitation& exc,
              const NoiseInput& noise, const SimConfig& cfg, const Grid& grid) {
  if (grid.n_skip + 2 > grid.n_total) {
    throw InvalidArgument("simulation leaves fewer than 2 samples after the transient");
  }
  const double fs = cfg.sample_rate;
  SimResult r;
  r.meta = cfg;
  std::vector<double> state;
  std::vector<double> out;
  if (integrates_ode(circuit)) {
    const ChargeModel m = charge_model(circuit);
    const double peak_e = std::abs(m.u_gain) * exc.amplitude +
                          std::abs(m.n_gain) * noise.peak(grid.n_total);
    const double guard = 10.0 * peak_e / m.lin;
    ChargeIntegrator integ(m, exc, noise, cfg, guard, r.stats);
    state = integ.run(grid.n_total);
    out.resize(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
      out[i] = m.out1 * state[i] + m.out2 * state[i] * state[i];
    }
  } else {
    out = algebraic_output(std::get<CircuitSpec>(circuit), exc, noise, fs,
                           grid.n_total);
    state = out;
  }
  const double t0 = static_cast<double>(grid.n_skip) / fs;
  auto tail = [&](const std::vector<double>& v) {
    return TimeSeries(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(grid.n_skip),
                                          v.end()),
                      fs, t0);
  };
  r.output = tail(out);
  r.state = tail(state);
  r.harmonics = measure_harmonics(r.output, exc.omega0);
  return r;
}

}  // namespace

double time_constant(const SimCircuit& circuit) {
  if (const auto* b = std::get_if<BjtCircuit>(&circuit)) {
    return b->eq.equivalent_rc().R * b->eq.coeffs.c_pi0;
  }
  const auto& spec = std::get<CircuitSpec>(circuit);
  if (!is_rc_family(spec)) return 0.0;
  const RcNonlinGC c = as_rc_gc(spec);
  return c.R * c.C0;
}

SimConfig default_sim_config(const SimCircuit& circuit, const Excitation& exc) {
  exc.validate();
  const double period = kTwoPi / exc.omega0;
  SimConfig cfg;
  cfg.sample_rate = 128.0 * exc.frequency();
  cfg.transient_skip = 20.0 * std::max(time_constant(circuit), period);
  cfg.duration = cfg.transient_skip + 200.0 * period;
  return cfg;
}

void validate(const SimConfig& cfg, const SimCircuit& circuit,
              const Excitation& exc) {
  exc.validate();
  if (const auto* spec = std::get_if<CircuitSpec>(&circuit)) {
    validate(*spec);
    if (is_rc_family(*spec) && !(as_rc_gc(*spec).C0 > 0.0)) {
      throw InvalidArgument("time-domain simulation of an RC circuit needs C0 > 0");
    }
  } else {
    const auto& eq = std::get<BjtCircuit>(circuit).eq;
    eq.validate();
    if (!(eq.coeffs.c_pi0 > 0.0)) {
      throw InvalidArgument("time-domain simulation needs C_pi0 > 0");
    }
  }
  if (!std::isfinite(cfg.sample_rate) ||
      cfg.sample_rate < 50.0 * exc.frequency() * (1.0 - 1e-12)) {
    throw SamplingError("sample_rate must be at least 50 f0");
  }
  const double min_skip =
      10.0 * std::max(time_constant(circuit), 1.0 / exc.omega0);
  if (!(cfg.transient_skip >= min_skip * (1.0 - 1e-12))) {
    throw InvalidArgument("transient_skip must be at least 10 max(R C0, 1/w0)");
  }
  if (!(cfg.duration > cfg.transient_skip)) {
    throw InvalidArgument("duration must exceed transient_skip");
  }
  if (!(cfg.tol > 0.0)) throw InvalidArgument("tol must be > 0");
  if (cfg.max_step_nonlin_iter < 1) {
    throw InvalidArgument("max_step_nonlin_iter must be >= 1");
  }
}

SimResult simulate(const SimCircuit& circuit, const Excitation& exc,
                   const std::optional<NoiseModel>& noise, Seed seed,
                   const SimConfig& cfg) {
  validate(cfg, circuit, exc);
  const Grid grid = grid_for(cfg);
  NoiseInput in;
  in.fs = cfg.sample_rate;
  std::vector<double> record;
  if (noise) {
    if (const auto* p = std::get_if<SingleToneProbe>(&*noise)) {
      in.probe = *p;
    } else {
      record = generate(*noise, seed, cfg.sample_rate, grid.n_total).samples;
      in.record = &record;
    }
  }
  return run(circuit, exc, in, cfg, grid);
}

SimResult simulate_injected(const SimCircuit& circuit, const Excitation& exc,
                            const TimeSeries& noise, const SimConfig& cfg) {
  validate(cfg, circuit, exc);
  const Grid grid = grid_for(cfg);
  if (std::abs(noise.sample_rate - cfg.sample_rate) >
      1e-9 * cfg.sample_rate) {
    throw SamplingError("injected noise must share the simulation sample rate");
  }
  if (noise.size() < grid.n_total) {
    throw InvalidArgument("injected noise record is shorter than the simulation");
  }
  NoiseInput in;
  in.fs = cfg.sample_rate;
  in.record = &noise.samples;
  return run(circuit, exc, in, cfg, grid);
}

ProbeMeasurement two_tone_probe(const SimCircuit& circuit, const Excitation& exc,
                                const SingleToneProbe& probe,
                                const SimConfig& cfg) {
  validate(cfg, circuit, exc);
  if (!(probe.omega_m > 0.0) || probe.omega_m > exc.omega0 / 20.0 * (1.0 + 1e-12)) {
    throw InvalidArgument("probe omega_m must lie in (0, omega0/20]");
  }
  const double ratio = exc.omega0 / probe.omega_m;
  const double l_round = std::round(ratio);
  if (std::abs(ratio - l_round) > 1e-9 * ratio) {
    throw InvalidArgument("omega0/omega_m must be an integer for a coherent probe");
  }
  const ChargeModel m = integrates_ode(circuit) ? charge_model(circuit) : ChargeModel{};
  if (std::abs(m.n_gain) * std::abs(probe.amplitude) >
      std::abs(m.u_gain) * exc.amplitude / 100.0 * (1.0 + 1e-12)) {
    throw InvalidArgument("probe amplitude must be at most 1% of the carrier drive");
  }
  if (!(probe.amplitude > 0.0)) {
    throw InvalidArgument("probe amplitude must be > 0");
  }

  const double f0 = exc.frequency();
  const auto per_carrier = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(cfg.sample_rate / f0)));
  SimConfig c = cfg;
  c.sample_rate = static_cast<double>(per_carrier) * f0;
  const auto per_probe = per_carrier * static_cast<std::size_t>(l_round);
  Grid grid;
  grid.n_skip = static_cast<std::size_t>(
      std::ceil(cfg.transient_skip * c.sample_rate - 1e-9));
  const double steady = (cfg.duration - cfg.transient_skip) * c.sample_rate;
  const auto k_periods = static_cast<std::size_t>(std::max(
      1.0, std::ceil(steady / static_cast<double>(per_probe) - 1e-9)));
  grid.n_total = grid.n_skip + k_periods * per_probe;
  c.transient_skip = static_cast<double>(grid.n_skip) / c.sample_rate;
  c.duration = static_cast<double>(grid.n_total) / c.sample_rate;
  validate(c, circuit, exc);

  NoiseInput in;
  in.fs = c.sample_rate;
  in.probe = probe;
  const SimResult r = run(circuit, exc, in, c, grid);
  const SidebandSplit s = sideband_split(r.output, exc.omega0, probe.omega_m);

  ProbeMeasurement pm;
  pm.h = {s.am / probe.amplitude, s.pm / probe.amplitude};
  pm.carrier_amp = std::abs(s.carrier);
  pm.harmonics = r.harmonics;
  pm.stats = r.stats;
  return pm;
}

NoiseRunResult noise_run(const SimCircuit& circuit, const Excitation& exc,
                         const NoiseModel& noise, Seed seed,
                         const SimConfig& cfg, const NoiseRunOptions& opts) {
  if (std::holds_alternative<SingleToneProbe>(noise)) {
    throw InvalidArgument("noise_run needs a stochastic model; use two_tone_probe");
  }
  if (!(opts.trim_fraction >= 0.0) || !(opts.trim_fraction < 0.5)) {
    throw InvalidArgument("trim_fraction must lie in [0, 0.5)");
  }
  validate(cfg, circuit, exc);
  const Grid grid = grid_for(cfg);
  const double lp_cutoff = opts.lp_cutoff > 0.0 ? opts.lp_cutoff : exc.frequency() / 20.0;
  const ZeroPhaseLowpass lp(lp_cutoff, cfg.sample_rate);

  TimeSeries injected = generate(noise, seed, cfg.sample_rate, grid.n_total);
  injected.samples = lp.apply(injected.samples);

  const SimResult sim = simulate_injected(circuit, exc, injected, cfg);
  const IqDecomposition iq =
      lockin_decompose(sim.output, exc.omega0, lp_cutoff, opts.decimate);
  const AmPmProcesses ap = to_am_pm(iq);

  // Reference: the injected record through the demodulator's lowpass and
  // decimation over the same window.
  const TimeSeries window = injected.slice(grid.n_skip, sim.output.size());
  const std::vector<double> ref = lp.apply(window.samples);
  std::vector<double> ref_dec;
  for (std::size_t i = 0; i < ref.size(); i += iq.decimate) ref_dec.push_back(ref[i]);
  const TimeSeries in_dec(std::move(ref_dec),
                          cfg.sample_rate / static_cast<double>(iq.decimate),
                          window.start_time);

  const TimeSeries a = ap.a_n.trimmed(opts.trim_fraction);
  const TimeSeries p = ap.phi_n.trimmed(opts.trim_fraction);
  const TimeSeries x = in_dec.trimmed(opts.trim_fraction);
  const std::size_t seg = default_segment_len(a.size(), opts.min_segments);

  NoiseRunResult r;
  r.s_an = welch_psd(a, seg);
  r.s_phin = welch_psd(p, seg);
  r.s_in = welch_psd(x, seg);
  r.carrier_amp = iq.carrier_amp;
  r.large_deviation = ap.large_deviation;
  r.stats = sim.stats;
  return r;
}

}  // namespace nlnoise
