#pragma once

// Time-domain integration of the governing equations, used as the oracle
// for the closed-form transfer functions.
//
// Every RC family, and the bipolar v_BE equation, is integrated in charge
// form
//
//   d/dt [ q0 v + q1 v^2 / 2 ] = u_gain v_e(t) + n_gain n(t) - lin v - quad v^2
//
// RC:      q0 = R C0, q1 = R C1, lin = 1, quad = g2 R, n_gain = 1
// bipolar: q0 = (R_B+R_E) C_pi0, q1 = (R_B+R_E) C_pi1, lin = k,
//          quad = g_pi2 (R_B+R_E) + g_m2 R_E, n_gain = -(R_B+R_E)
//
// The memoryless and single-element circuits are evaluated algebraically.

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "nlnoise/analytic_tf.hpp"
#include "nlnoise/iq_demod.hpp"
#include "nlnoise/noise_gen.hpp"
#include "nlnoise/signal.hpp"
#include "nlnoise/spectral.hpp"

namespace nlnoise {

enum class Integrator { kTrapezoidal, kRk4 };

/// Direct integration of the bipolar v_BE equation; output is the
/// collector current deviation i_C = (g_m1 + g_m2 v) v, noise input is the
/// base noise current (A).
struct BjtCircuit {
  BjtEquivalent eq;
};

using SimCircuit = std::variant<CircuitSpec, BjtCircuit>;

struct SimConfig {
  double sample_rate = 0.0;     // Hz, >= 50 f0
  double duration = 0.0;        // s, total including transient
  Integrator integrator = Integrator::kTrapezoidal;
  double transient_skip = 0.0;  // s, >= 10 max(R C0, 1/w0)
  int max_step_nonlin_iter = 50;
  double tol = 1e-13;           // relative Newton step tolerance
};

struct SimStats {
  std::size_t steps = 0;
  std::size_t newton_iterations = 0;
  int max_newton_iterations = 0;
};

struct SimResult {
  TimeSeries output;  // v_o, i_o or i_C after the transient
  TimeSeries state;   // integrated node voltage (equals output for RC)
  std::vector<Harmonic> harmonics;  // k = 0..3 over trailing full periods
  SimConfig meta;
  SimStats stats;
};

/// Linear time constant of the circuit (0 for memoryless forms).
[[nodiscard]] double time_constant(const SimCircuit& circuit);

/// 128 samples per carrier period, transient 20 max(R C0, 2 pi / w0),
/// 200 carrier periods of steady state.
[[nodiscard]] SimConfig default_sim_config(const SimCircuit& circuit,
                                           const Excitation& exc);

void validate(const SimConfig& cfg, const SimCircuit& circuit,
              const Excitation& exc);

[[nodiscard]] SimResult simulate(const SimCircuit& circuit,
                                 const Excitation& exc,
                                 const std::optional<NoiseModel>& noise,
                                 Seed seed, const SimConfig& cfg);

/// Same as simulate() with an explicit noise record sampled at
/// cfg.sample_rate from t = 0 (at least duration * fs samples).
[[nodiscard]] SimResult simulate_injected(const SimCircuit& circuit,
                                          const Excitation& exc,
                                          const TimeSeries& noise,
                                          const SimConfig& cfg);

struct ProbeMeasurement {
  NoiseTransfer h;  // complex, per unit probe input
  double carrier_amp = 0.0;
  std::vector<Harmonic> harmonics;
  SimStats stats;
};

/// Injects the probe as noise and reads AM/PM from the sidebands at
/// w0 +- wm. The sample rate is rounded to an integer number of samples per
/// carrier period and the steady-state window to whole probe periods;
/// w0 / wm must be an integer.
[[nodiscard]] ProbeMeasurement two_tone_probe(const SimCircuit& circuit,
                                              const Excitation& exc,
                                              const SingleToneProbe& probe,
                                              const SimConfig& cfg);

struct NoiseRunOptions {
  double lp_cutoff = 0.0;       // Hz, 0 -> f0 / 20
  std::size_t decimate = 0;     // 0 -> default_decimation()
  std::size_t min_segments = 64;
  double trim_fraction = 0.05;  // dropped at each end after demodulation
};

struct NoiseRunResult {
  PsdEstimate s_an;
  PsdEstimate s_phin;
  PsdEstimate s_in;
  double carrier_amp = 0.0;
  bool large_deviation = false;
  SimStats stats;
};

/// Stochastic path: band-limits the noise to the demodulation bandwidth,
/// simulates, demodulates and returns PSDs of a_n, phi_n and of the
/// injected noise seen through the same lowpass and decimation.
[[nodiscard]] NoiseRunResult noise_run(const SimCircuit& circuit,
                                       const Excitation& exc,
                                       const NoiseModel& noise, Seed seed,
                                       const SimConfig& cfg,
                                       const NoiseRunOptions& opts = {});

}  // namespace nlnoise
