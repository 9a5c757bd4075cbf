#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

#include "nlnoise/analytic_tf.hpp"
#include "nlnoise/bjt_extract.hpp"
#include "nlnoise/error.hpp"
#include "nlnoise/iq_demod.hpp"
#include "nlnoise/spectral.hpp"

namespace nlnoise::cli {

namespace {

struct PointResult {
  std::vector<Cell> row;
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<std::pair<std::string, std::string>> files;
  std::string log;
  bool failed = false;
};

Cell blank() { return std::monostate{}; }

Cell rc_coordinate(const SimCircuit& circuit, const Excitation& exc) {
  const double tau = time_constant(circuit);
  if (!(tau > 0.0)) return blank();
  return tau * exc.omega0;
}

const std::vector<std::string>& command_columns(Command cmd) {
  static const std::vector<std::string> analyze = {
      "circuit", "omega0", "rc_omega0", "amplitude", "h_am", "h_pm",
      "validity_metric", "validity_flag", "v_o0", "v_o1", "phi_o1", "v_o2",
      "phi_o2", "status"};
  static const std::vector<std::string> simulate = {
      "circuit", "omega0", "rc_omega0", "amplitude", "method", "h_am_theory",
      "h_pm_theory", "h_am_measured", "h_pm_measured", "h_am_meas_re",
      "h_am_meas_im", "h_pm_meas_re", "h_pm_meas_im", "rel_err_am",
      "rel_err_pm", "validity_metric", "validity_flag", "status"};
  static const std::vector<std::string> extract = {
      "omega0", "rc_omega0", "amplitude", "bias_vbe", "bias_ic", "g_pi1",
      "g_pi2", "g_m1", "g_m2", "c_pi0", "c_pi1", "r_b", "r_e", "k", "r_eq",
      "g2_eq", "h_am", "h_pm", "validity_metric", "validity_flag",
      "h_am_measured", "h_pm_measured", "rel_err_am", "rel_err_pm", "status"};
  static const std::vector<std::string> psd = {
      "circuit", "omega0", "rc_omega0", "amplitude", "noise", "f_lo", "f_hi",
      "ratio_am", "h_am_sq_theory", "ratio_pm", "h_pm_sq_theory",
      "rel_err_am", "rel_err_pm", "slope_in", "slope_an", "slope_phin",
      "s_in_band", "s_an_band", "s_phin_band", "n_segments",
      "validity_metric", "validity_flag", "status"};
  switch (cmd) {
    case Command::kAnalyze: return analyze;
    case Command::kSimulate: return simulate;
    case Command::kExtract: return extract;
    case Command::kPsd: return psd;
  }
  return analyze;
}

std::string noise_label(const NoiseModel& m) {
  if (std::holds_alternative<White>(m)) return "white";
  if (std::holds_alternative<Flicker>(m)) return "flicker";
  return "probe";
}

PointResult analyze_point(const SweepPoint& p) {
  const CircuitSpec spec = circuit_from(p.tree);
  const SimCircuit circuit = spec;
  const Excitation exc = excitation_from(p.tree, time_constant(circuit));
  const NoiseTransfer h = closed_form_tf(spec, exc);
  const ValidityReport v = validity(spec, exc, validity_threshold(p.tree));

  PointResult r;
  r.row = {std::string(circuit_name(spec)), exc.omega0, rc_coordinate(circuit, exc),
           exc.amplitude, h.h_am.real(), h.h_pm.real(), v.metric,
           v.small_signal_ok ? 0.0 : 1.0};
  if (std::holds_alternative<RcNonlinG>(spec) || std::holds_alternative<RcNonlinC>(spec)) {
    const auto hs = harmonic_prediction(spec, exc);
    r.row.insert(r.row.end(), {hs[0].signed_dc(), hs[1].amplitude, hs[1].phase,
                               hs[2].amplitude, hs[2].phase});
  } else {
    r.row.insert(r.row.end(), 5, blank());
  }
  r.row.emplace_back(std::string("ok"));
  return r;
}

PointResult simulate_point(const SweepPoint& p) {
  const CircuitSpec spec = circuit_from(p.tree);
  const SimCircuit circuit = spec;
  const Excitation exc = excitation_from(p.tree, time_constant(circuit));
  const NoiseModel noise = noise_from(p.tree, exc);
  const SimConfig sim = sim_from(p.tree, circuit, exc);
  const NoiseTransfer th = closed_form_tf(spec, exc);
  const ValidityReport v = validity(spec, exc, validity_threshold(p.tree));
  const double th_am = th.h_am.real();
  const double th_pm = th.h_pm.real();

  PointResult r;
  r.row = {std::string(circuit_name(spec)), exc.omega0, rc_coordinate(circuit, exc),
           exc.amplitude};
  std::ostringstream log;
  if (const auto* probe = std::get_if<SingleToneProbe>(&noise)) {
    const ProbeMeasurement m = two_tone_probe(circuit, exc, *probe, sim);
    const double am = signed_magnitude(m.h.h_am);
    const double pm = signed_magnitude(m.h.h_pm);
    r.row.insert(r.row.end(),
                 {std::string("two_tone"), th_am, th_pm, am, pm, m.h.h_am.real(),
                  m.h.h_am.imag(), m.h.h_pm.real(), m.h.h_pm.imag(),
                  rel_err(am, th_am), rel_err(pm, th_pm)});
    log << "steps=" << m.stats.steps << " max_newton=" << m.stats.max_newton_iterations;
  } else {
    NoiseRunOptions opts;
    opts.decimate = 16;
    const NoiseRunResult nr = noise_run(circuit, exc, noise, Seed{p.seed}, sim, opts);
    const double f0 = exc.frequency();
    const double am = std::sqrt(psd_ratio_check(nr.s_an, nr.s_in, f0 / 2000.0, f0 / 40.0));
    const double pm = std::sqrt(psd_ratio_check(nr.s_phin, nr.s_in, f0 / 2000.0, f0 / 40.0));
    r.row.insert(r.row.end(),
                 {std::string("noise_run"), th_am, th_pm, am, pm, blank(), blank(),
                  blank(), blank(), rel_err(am, std::abs(th_am)),
                  rel_err(pm, std::abs(th_pm))});
    log << "steps=" << nr.stats.steps << " segments=" << nr.s_an.n_segments;
  }
  r.row.insert(r.row.end(), {v.metric, v.small_signal_ok ? 0.0 : 1.0, std::string("ok")});
  r.log = log.str();
  return r;
}

PointResult extract_point(const SweepPoint& p) {
  const Json& x = p.tree.at("extract");
  const Json& d = p.tree.at("device");
  std::vector<BjtOpRow> rows;
  double bias = 0.0;
  std::vector<InnerRow> inner;
  const bool synthetic = d.at("source") == "synthetic";
  if (synthetic) {
    const SyntheticDevice dev = device_from(p.tree);
    rows = trace_curves(dev, linear_sweep(x.at("v_start").get<double>(),
                                          x.at("v_stop").get<double>(),
                                          x.at("points").get<std::size_t>()));
  } else {
    rows = import_op_table(d.at("path").get<std::string>());
  }
  inner = x.at("de_embed").get<bool>() ? de_embed(rows) : without_de_embedding(rows);
  bias = bias_for_ic(inner, x.at("bias_ic").get<double>());
  const ExtractedCoeffs c = extract_coeffs(inner, bias);
  const TerminalResistances res = table_resistances(inner, bias);
  const BjtEquivalent eq{c, res};
  const RcNonlinGC rc = eq.equivalent_rc();
  const SimCircuit circuit = BjtCircuit{eq};
  const Excitation exc = excitation_from(p.tree, rc.R * rc.C0);
  const NoiseTransfer h = bipolar_tf(c, res, exc);
  const ValidityReport v = validity(rc, Excitation{exc.amplitude / eq.k(), exc.omega0},
                                    validity_threshold(p.tree));

  PointResult r;
  r.row = {exc.omega0, rc.R * rc.C0 * exc.omega0, exc.amplitude, c.bias_vbe, c.bias_ic,
           c.g_pi1, c.g_pi2, c.g_m1, c.g_m2, c.c_pi0, c.c_pi1, res.r_b, res.r_e,
           eq.k(), rc.R, rc.g2, h.h_am.real(), h.h_pm.real(), v.metric,
           v.small_signal_ok ? 0.0 : 1.0};
  if (x.at("verify").get<bool>()) {
    const SimConfig sim = sim_from(p.tree, circuit, exc);
    const double rsum = res.r_b + res.r_e;
    const SingleToneProbe probe{x.at("probe_ratio").get<double>() * exc.amplitude / rsum,
                                exc.omega0 / 100.0};
    const ProbeMeasurement m = two_tone_probe(circuit, exc, probe, sim);
    const double am = signed_magnitude(m.h.h_am);
    const double pm = signed_magnitude(m.h.h_pm);
    r.row.insert(r.row.end(), {am, pm, rel_err(am, h.h_am.real()), rel_err(pm, h.h_pm.real())});
  } else {
    r.row.insert(r.row.end(), 4, blank());
  }
  r.row.emplace_back(std::string("ok"));
  if (p.index == 0) r.files.emplace_back("op_table.csv", format_op_table(rows));
  return r;
}

PointResult psd_point(const SweepPoint& p) {
  const CircuitSpec spec = circuit_from(p.tree);
  const SimCircuit circuit = spec;
  const Excitation exc = excitation_from(p.tree, time_constant(circuit));
  const NoiseModel noise = noise_from(p.tree, exc);
  SimConfig sim = sim_from(p.tree, circuit, exc);
  NoiseRunOptions opts = psd_options_from(p.tree);
  opts.lp_cutoff = p.tree.at("psd").at("lp_cutoff_ratio").get<double>() * exc.frequency();
  sim.duration = sim.transient_skip + psd_steady_duration(p.tree, sim, opts, exc);
  const auto band = psd_band(p.tree, exc);
  const NoiseTransfer th = closed_form_tf(spec, exc);
  const ValidityReport v = validity(spec, exc, validity_threshold(p.tree));

  const NoiseRunResult nr = noise_run(circuit, exc, noise, Seed{p.seed}, sim, opts);
  // The Hann main lobe spans +-2 bins; lower bins mix in near-dc content.
  const double f_lo = std::max(band.first, 4.0 * nr.s_in.df());
  const double f_hi = band.second;
  if (!(f_hi > f_lo)) {
    throw InvalidArgument("psd band lies below the spectral resolution; raise decimated_samples");
  }
  const double th_am2 = std::norm(th.h_am);
  const double th_pm2 = std::norm(th.h_pm);
  const double s_in = band_mean(nr.s_in, f_lo, f_hi);
  const double s_an = band_mean(nr.s_an, f_lo, f_hi);
  const double s_phin = band_mean(nr.s_phin, f_lo, f_hi);
  auto ratio = [&](const PsdEstimate& out) -> Cell {
    try {
      return psd_ratio_check(out, nr.s_in, f_lo, f_hi);
    } catch (const InvalidArgument&) {
      return blank();
    }
  };
  auto slope = [&](const PsdEstimate& s) -> Cell {
    try {
      return log_log_slope(s, f_lo, f_hi);
    } catch (const InvalidArgument&) {
      return blank();
    }
  };
  const Cell r_am = ratio(nr.s_an);
  const Cell r_pm = ratio(nr.s_phin);
  auto err = [](const Cell& m, double t) -> Cell {
    if (const double* d = std::get_if<double>(&m)) return rel_err(*d, t);
    return blank();
  };

  PointResult r;
  r.row = {std::string(circuit_name(spec)), exc.omega0, rc_coordinate(circuit, exc),
           exc.amplitude, noise_label(noise), f_lo, f_hi, r_am, th_am2, r_pm, th_pm2,
           err(r_am, th_am2), err(r_pm, th_pm2), slope(nr.s_in), slope(nr.s_an),
           slope(nr.s_phin), s_in, s_an, s_phin,
           static_cast<double>(nr.s_an.n_segments), v.metric,
           v.small_signal_ok ? 0.0 : 1.0, std::string("ok")};

  Table spectra;
  spectra.columns = {"freq", "s_in", "s_an", "s_phin"};
  for (std::size_t k = 0; k < nr.s_in.freqs.size(); ++k) {
    spectra.rows.push_back({nr.s_in.freqs[k], nr.s_in.values[k], nr.s_an.values[k],
                            nr.s_phin.values[k]});
  }
  char name[64];
  std::snprintf(name, sizeof(name), "spectra_%04zu.csv", p.index);
  r.tables.emplace_back(name, std::move(spectra));
  std::ostringstream log;
  log << "steps=" << nr.stats.steps << " segments=" << nr.s_an.n_segments
      << " segment_len=" << nr.s_an.segment_len
      << (nr.large_deviation ? " large_deviation" : "");
  r.log = log.str();
  return r;
}

PointResult evaluate(Command cmd, const SweepPoint& p) {
  switch (cmd) {
    case Command::kAnalyze: return analyze_point(p);
    case Command::kSimulate: return simulate_point(p);
    case Command::kExtract: return extract_point(p);
    case Command::kPsd: return psd_point(p);
  }
  throw Error("unknown command");
}

PointResult failed_point(Command cmd, const std::string& msg) {
  PointResult r;
  r.failed = true;
  r.row.assign(command_columns(cmd).size() - 1, blank());
  r.row.emplace_back("error: " + msg);
  r.log = "error: " + msg;
  return r;
}

}  // namespace

double rel_err(double measured, double theory) {
  return std::abs(measured - theory) / std::max(std::abs(theory), kRelErrFloor);
}

double signed_magnitude(std::complex<double> h) {
  return h.real() < 0.0 ? -std::abs(h) : std::abs(h);
}

int resolve_jobs(int cli_jobs) {
  if (cli_jobs > 0) return cli_jobs;
  if (const char* env = std::getenv("NLNOISE_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

RunOutput run_experiment(const ExperimentConfig& cfg, int jobs) {
  const std::vector<SweepPoint> points = expand_sweep(cfg);
  std::vector<PointResult> results(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = evaluate(cfg.command, points[i]);
      } catch (const std::exception& e) {
        results[i] = failed_point(cfg.command, e.what());
      }
    }
  };
  const auto n_workers = static_cast<std::size_t>(std::clamp<int>(jobs, 1, 1024));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(n_workers, points.size()); ++w) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) t.join();

  RunOutput out;
  for (const auto& ax : cfg.sweep) out.results.columns.push_back(ax.path);
  const auto& cols = command_columns(cfg.command);
  out.results.columns.insert(out.results.columns.end(), cols.begin(), cols.end());
  for (std::size_t i = 0; i < points.size(); ++i) {
    PointResult& r = results[i];
    std::vector<Cell> row;
    for (const auto& [path, value] : points[i].coords) row.emplace_back(value);
    row.insert(row.end(), r.row.begin(), r.row.end());
    out.results.rows.push_back(std::move(row));
    for (auto& t : r.tables) out.tables.push_back(std::move(t));
    for (auto& f : r.files) out.files.push_back(std::move(f));
    std::ostringstream line;
    line << "point " << i;
    for (const auto& [path, value] : points[i].coords) line << ' ' << path << '=' << value;
    line << ": " << (r.failed ? "FAILED" : "ok");
    if (!r.log.empty()) line << " (" << r.log << ")";
    out.log.push_back(line.str());
    if (r.failed) ++out.failed_points;
  }
  return out;
}

}  // namespace nlnoise::cli
