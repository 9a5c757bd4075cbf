#include <gtest/gtest.h>

#include <cmath>

#include "nlnoise/error.hpp"
#include "nlnoise/ode_sim.hpp"

namespace nlnoise {
namespace {

constexpr double kR = 100.0;
constexpr double kC0 = 100e-15;
constexpr double kG2 = 10e-3;
constexpr double kC1 = 500e-15;
const double kWn = 1.0 / (kR * kC0);

// Two probe periods of steady state after the default transient.
SimConfig probe_config(const SimCircuit& c, const Excitation& e) {
  SimConfig cfg = default_sim_config(c, e);
  cfg.duration = cfg.transient_skip + 200.0 * kTwoPi / e.omega0;
  return cfg;
}

ProbeMeasurement probe(const SimCircuit& c, const Excitation& e, double amp,
                       const SimConfig* cfg = nullptr) {
  const SimConfig base = cfg ? *cfg : probe_config(c, e);
  return two_tone_probe(c, e, SingleToneProbe{amp, e.omega0 / 100.0}, base);
}

double signed_mag(std::complex<double> h) {
  return std::abs(h) * (h.real() < 0.0 ? -1.0 : 1.0);
}

TEST(Simulate, LinearRcFundamental) {
  const SimCircuit c = CircuitSpec{RcNonlinG{kR, kC0, 0.0}};
  const Excitation e{0.1, kWn};
  const SimResult r = simulate(c, e, std::nullopt, Seed{}, default_sim_config(c, e));
  ASSERT_GE(r.harmonics.size(), 3u);
  EXPECT_NEAR(r.harmonics[1].amplitude / (0.1 / std::sqrt(2.0)), 1.0, 1e-3);
  EXPECT_NEAR(r.harmonics[1].phase * 180.0 / kPi, -45.0, 0.1);
  EXPECT_LT(r.harmonics[2].amplitude, 1e-9);
  for (double v : r.output.samples) ASSERT_TRUE(std::isfinite(v));
}

TEST(Simulate, SecondHarmonicMatchesPrediction) {
  const CircuitSpec s = RcNonlinG{kR, kC0, kG2};
  const Excitation e{0.1, kWn};
  const SimResult r = simulate(s, e, std::nullopt, Seed{}, default_sim_config(s, e));
  const auto p = harmonic_prediction(s, e);
  EXPECT_NEAR(r.harmonics[2].amplitude / p[2].amplitude, 1.0, 0.05);
  EXPECT_NEAR(r.harmonics[0].signed_dc() / p[0].signed_dc(), 1.0, 0.05);
}

TEST(Simulate, ZeroDriveZeroOutput) {
  const SimCircuit c = CircuitSpec{RcNonlinGC{kR, kC0, kG2, kC1}};
  const Excitation e{0.0, kWn};
  const SimResult r = simulate(c, e, std::nullopt, Seed{}, default_sim_config(c, e));
  for (double v : r.output.samples) ASSERT_EQ(v, 0.0);
}

TEST(Simulate, OutputGridStartsAfterTransient) {
  const SimCircuit c = CircuitSpec{RcNonlinG{kR, kC0, kG2}};
  const Excitation e{0.05, kWn};
  const SimConfig cfg = default_sim_config(c, e);
  const SimResult r = simulate(c, e, std::nullopt, Seed{}, cfg);
  EXPECT_NEAR(r.output.start_time, cfg.transient_skip, 1.0 / cfg.sample_rate);
  EXPECT_DOUBLE_EQ(r.output.sample_rate, cfg.sample_rate);
  EXPECT_GT(r.stats.steps, 0u);
  EXPECT_EQ(r.meta.sample_rate, cfg.sample_rate);
}

TEST(Simulate, Rk4AgreesWithTrapezoidal) {
  const SimCircuit c = CircuitSpec{RcNonlinGC{kR, kC0, kG2, kC1}};
  const Excitation e{0.05, kWn};
  SimConfig cfg = default_sim_config(c, e);
  const SimResult a = simulate(c, e, std::nullopt, Seed{}, cfg);
  cfg.integrator = Integrator::kRk4;
  const SimResult b = simulate(c, e, std::nullopt, Seed{}, cfg);
  for (int k = 1; k <= 2; ++k) {
    EXPECT_NEAR(b.harmonics[k].amplitude / a.harmonics[k].amplitude, 1.0, 5e-3) << k;
  }
}

TEST(Simulate, StepHalvingConverges) {
  const CircuitSpec s = RcNonlinG{kR, kC0, kG2};
  const Excitation e{0.1, kWn};
  SimConfig cfg = default_sim_config(s, e);
  const SimResult a = simulate(s, e, std::nullopt, Seed{}, cfg);
  cfg.sample_rate *= 2.0;
  const SimResult b = simulate(s, e, std::nullopt, Seed{}, cfg);
  for (int k = 1; k <= 2; ++k) {
    EXPECT_NEAR(b.harmonics[k].amplitude / a.harmonics[k].amplitude, 1.0, 5e-3) << k;
  }
  const ProbeMeasurement pa = probe(s, e, 1e-4);
  SimConfig fine = probe_config(s, e);
  fine.sample_rate *= 2.0;
  const ProbeMeasurement pb = probe(s, e, 1e-4, &fine);
  EXPECT_NEAR(std::abs(pb.h.h_am) / std::abs(pa.h.h_am), 1.0, 5e-3);
  EXPECT_NEAR(std::abs(pb.h.h_pm) / std::abs(pa.h.h_pm), 1.0, 5e-3);
}

TEST(Simulate, NegativeCapacitanceTripsGuard) {
  const SimCircuit c = CircuitSpec{RcNonlinC{kR, kC0, -2e-12}};
  const Excitation e{0.1, kWn};
  EXPECT_THROW((void)simulate(c, e, std::nullopt, Seed{}, default_sim_config(c, e)),
               ConvergenceError);
}

TEST(Simulate, ConfigErrors) {
  const SimCircuit c = CircuitSpec{RcNonlinG{kR, kC0, kG2}};
  const Excitation e{0.05, kWn};
  SimConfig cfg = default_sim_config(c, e);
  cfg.sample_rate = 40.0 * e.frequency();
  EXPECT_THROW(validate(cfg, c, e), SamplingError);
  cfg = default_sim_config(c, e);
  cfg.transient_skip = kR * kC0;
  EXPECT_THROW(validate(cfg, c, e), InvalidArgument);
  cfg = default_sim_config(c, e);
  cfg.tol = 0.0;
  EXPECT_THROW(validate(cfg, c, e), InvalidArgument);
  cfg = default_sim_config(c, e);
  cfg.duration = cfg.transient_skip;
  EXPECT_THROW(validate(cfg, c, e), InvalidArgument);
  const SimCircuit no_cap = CircuitSpec{RcNonlinG{kR, 0.0, kG2}};
  EXPECT_THROW(validate(default_sim_config(c, e), no_cap, e), InvalidArgument);
}

TEST(Simulate, InjectedNoiseMustMatchGrid) {
  const SimCircuit c = CircuitSpec{RcNonlinG{kR, kC0, kG2}};
  const Excitation e{0.05, kWn};
  const SimConfig cfg = default_sim_config(c, e);
  const TimeSeries short_rec(std::vector<double>(10, 0.0), cfg.sample_rate);
  EXPECT_THROW((void)simulate_injected(c, e, short_rec, cfg), InvalidArgument);
  const TimeSeries wrong_rate(std::vector<double>(10, 0.0), 0.5 * cfg.sample_rate);
  EXPECT_THROW((void)simulate_injected(c, e, wrong_rate, cfg), SamplingError);
}

TEST(TwoTone, RcNonlinGUnitFrequency) {
  const CircuitSpec s = RcNonlinG{kR, kC0, kG2};
  const ProbeMeasurement m = probe(s, {0.05, kWn}, 1e-4);
  EXPECT_NEAR(signed_mag(m.h.h_am), -1.0, 0.05);
  EXPECT_NEAR(signed_mag(m.h.h_pm), 1.0, 0.05);
  EXPECT_NEAR(m.carrier_amp, 0.05 / std::sqrt(2.0), 0.01 * 0.05);
}

TEST(TwoTone, RcNonlinCUnitFrequency) {
  const CircuitSpec s = RcNonlinC{kR, kC0, kC1};
  const ProbeMeasurement m = probe(s, {0.05, kWn}, 1e-4);
  EXPECT_NEAR(signed_mag(m.h.h_pm), -2.5, 0.05 * 2.5);
}

TEST(TwoTone, MemorylessHasNoPm) {
  const CircuitSpec s = Memoryless{1.0, 0.1};
  const ProbeMeasurement m = probe(s, {0.05, kTwoPi * 1e6}, 1e-4);
  EXPECT_NEAR(signed_mag(m.h.h_am), 0.2, 1e-3);
  EXPECT_LT(std::abs(m.h.h_pm), 1e-3 * std::abs(m.h.h_am));
}

TEST(TwoTone, ElementaryFormsMatchClosedForm) {
  const Excitation e{0.05, kTwoPi * 1e9};
  for (const CircuitSpec& s :
       {CircuitSpec{LinCapNonlinG{kC0, kG2}}, CircuitSpec{LinGNonlinCap{10e-3, kC1}}}) {
    const ProbeMeasurement m = probe(s, e, 1e-4);
    const NoiseTransfer cf = closed_form_tf(s, e);
    EXPECT_NEAR(signed_mag(m.h.h_pm) / cf.h_pm.real(), 1.0, 0.05) << circuit_name(s);
  }
}

TEST(TwoTone, ProbeLinearity) {
  const CircuitSpec s = RcNonlinGC{kR, kC0, kG2, kC1};
  const Excitation e{0.05, 0.7 * kWn};
  const ProbeMeasurement a = probe(s, e, 2e-4);
  const ProbeMeasurement b = probe(s, e, 1e-4);
  EXPECT_NEAR(std::abs(b.h.h_am) / std::abs(a.h.h_am), 1.0, 0.01);
  EXPECT_NEAR(std::abs(b.h.h_pm) / std::abs(a.h.h_pm), 1.0, 0.01);
}

TEST(TwoTone, DriveLevelIndependence) {
  const CircuitSpec s = RcNonlinG{kR, kC0, kG2};
  const ProbeMeasurement ref = probe(s, {0.02, kWn}, 0.005 * 0.02);
  for (double v1 : {0.05, 0.1}) {
    const ProbeMeasurement m = probe(s, {v1, kWn}, 0.005 * v1);
    EXPECT_NEAR(signed_mag(m.h.h_am) / signed_mag(ref.h.h_am), 1.0, 0.05) << v1;
  }
}

TEST(TwoTone, Errors) {
  const CircuitSpec s = RcNonlinG{kR, kC0, kG2};
  const Excitation e{0.05, kWn};
  const SimConfig cfg = probe_config(s, e);
  EXPECT_THROW((void)two_tone_probe(s, e, {1e-3, e.omega0 / 100.0}, cfg), InvalidArgument);
  EXPECT_THROW((void)two_tone_probe(s, e, {1e-4, e.omega0 / 10.0}, cfg), InvalidArgument);
  EXPECT_THROW((void)two_tone_probe(s, e, {1e-4, e.omega0 / 33.3}, cfg), InvalidArgument);
}

TEST(Bipolar, DirectAndMappedStatesAgree) {
  ExtractedCoeffs k{3.8e-4, 7.3e-3, 38.7e-3, 0.748, 60e-15, 20e-15, 0.85, 1e-3};
  const BjtEquivalent eq{k, {100.0, 3.0}};
  const RcNonlinGC rc = eq.equivalent_rc();
  const Excitation e{0.01, 1.0 / (rc.R * rc.C0)};
  const Excitation inner{e.amplitude / eq.k(), e.omega0};
  const SimCircuit direct = BjtCircuit{eq};
  const SimCircuit mapped = CircuitSpec{rc};
  const SimConfig cfg = default_sim_config(direct, e);
  const SimResult a = simulate(direct, e, std::nullopt, Seed{}, cfg);
  const SimResult b = simulate(mapped, inner, std::nullopt, Seed{}, cfg);
  ASSERT_EQ(a.state.size(), b.state.size());
  double peak = 0.0;
  double diff = 0.0;
  for (std::size_t i = 0; i < a.state.size(); ++i) {
    peak = std::max(peak, std::abs(b.state.samples[i]));
    diff = std::max(diff, std::abs(a.state.samples[i] - b.state.samples[i]));
  }
  EXPECT_LT(diff, 1e-9 * peak);
  // Collector current is (g_m1 + g_m2 v) v of the shared state.
  const double v = a.state.samples[10];
  EXPECT_NEAR(a.output.samples[10], (k.g_m1 + k.g_m2 * v) * v, 1e-15);
}

// White noise through the nonlinear RC: output AM/PM PSDs follow
// |H|^2 times the input PSD; a linear circuit leaves only the floor.
class NoiseRun : public ::testing::Test {
 protected:
  static NoiseRunResult run(double g2) {
    const CircuitSpec s = RcNonlinG{kR, kC0, g2};
    const Excitation e{0.05, kWn};
    SimConfig cfg = default_sim_config(s, e);
    cfg.sample_rate = 64.0 * e.frequency();
    NoiseRunOptions o;
    o.decimate = 16;
    cfg.duration = cfg.transient_skip + 1024.0 * 70.0 * 16.0 / cfg.sample_rate / 0.9;
    return noise_run(s, e, White{1e-14}, Seed{42}, cfg, o);
  }
  static double lo() { return kWn / kTwoPi / 2000.0; }
  static double hi() { return kWn / kTwoPi / 40.0; }
};

TEST_F(NoiseRun, PsdRatiosFollowClosedForm) {
  const NoiseRunResult r = run(kG2);
  const NoiseTransfer th = closed_form_tf(RcNonlinG{kR, kC0, kG2}, {0.05, kWn});
  EXPECT_GE(r.s_an.n_segments, 64u);
  EXPECT_NEAR(psd_ratio_check(r.s_an, r.s_in, lo(), hi()) / std::norm(th.h_am), 1.0, 0.1);
  EXPECT_NEAR(psd_ratio_check(r.s_phin, r.s_in, lo(), hi()) / std::norm(th.h_pm), 1.0, 0.1);
  EXPECT_FALSE(r.large_deviation);

  const NoiseRunResult lin = run(0.0);
  EXPECT_LT(band_mean(lin.s_an, lo(), hi()), 1e-4 * band_mean(r.s_an, lo(), hi()));
  EXPECT_LT(band_mean(lin.s_phin, lo(), hi()), 1e-4 * band_mean(r.s_phin, lo(), hi()));
}

TEST_F(NoiseRun, RejectsProbeModel) {
  const CircuitSpec s = RcNonlinG{kR, kC0, kG2};
  const Excitation e{0.05, kWn};
  EXPECT_THROW((void)noise_run(s, e, SingleToneProbe{1e-4, kWn / 100.0}, Seed{},
                               default_sim_config(s, e)),
               InvalidArgument);
}

}  // namespace
}  // namespace nlnoise
