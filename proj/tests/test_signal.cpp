#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nlnoise/error.hpp"
#include "nlnoise/signal.hpp"

namespace nlnoise {
namespace {

TEST(SynthTone, LengthAndFirstSample) {
  const TimeSeries s = synth_tone({1.0, kTwoPi * 1e9}, 1e11, 1e-8);
  EXPECT_EQ(s.size(), 1000u);
  EXPECT_EQ(s.samples[0], 1.0);
  EXPECT_DOUBLE_EQ(s.sample_rate, 1e11);
}

TEST(SynthTone, ZeroAmplitudeIsZero) {
  const TimeSeries s = synth_tone({0.0, kTwoPi * 1e9}, 1e11, 1e-8);
  for (double v : s.samples) EXPECT_EQ(v, 0.0);
}

TEST(SynthTone, RejectsUndersampling) {
  EXPECT_THROW((void)synth_tone({0.1, kTwoPi * 1e9}, 8e9, 1e-8), SamplingError);
}

TEST(SynthTone, RejectsBadDuration) {
  EXPECT_THROW((void)synth_tone({0.1, kTwoPi * 1e9}, 1e11, 0.0), InvalidArgument);
}

TEST(SynthTone, SamplesFollowCosine) {
  const Excitation e{0.3, kTwoPi * 2e6};
  const TimeSeries s = synth_tone(e, 1e8, 1e-5);
  for (std::size_t n = 0; n < s.size(); n += 97) {
    EXPECT_NEAR(s.samples[n], 0.3 * std::cos(e.omega0 * n / 1e8), 1e-14);
  }
}

TEST(SynthTone, RmsOverIntegerPeriods) {
  // 100 periods at 64 samples per period.
  const TimeSeries s = synth_tone({0.7, kTwoPi * 1e6}, 64e6, 100e-6);
  EXPECT_NEAR(rms(s.view()), 0.7 / std::sqrt(2.0), 0.001 * 0.7 / std::sqrt(2.0));
}

TEST(WrapPhase, Examples) {
  EXPECT_NEAR(wrap_phase(1.5 * kPi), -0.5 * kPi, 1e-15);
  EXPECT_EQ(wrap_phase(0.0), 0.0);
  EXPECT_EQ(wrap_phase(-kPi), kPi);
  EXPECT_EQ(wrap_phase(kPi), kPi);
}

TEST(WrapPhase, IdempotentAndCongruent) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    const double w = wrap_phase(x);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_EQ(wrap_phase(w), w);
    const double k = (x - w) / kTwoPi;
    EXPECT_NEAR(k, std::round(k), 1e-9);
  }
}

TEST(TimeSeries, RejectsNonPositiveRate) {
  EXPECT_THROW(TimeSeries({1.0}, 0.0), InvalidArgument);
  EXPECT_THROW(TimeSeries({1.0}, -1.0), InvalidArgument);
}

TEST(TimeSeries, SliceKeepsAbsoluteTime) {
  TimeSeries s({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 10.0, 1.0);
  const TimeSeries t = s.slice(3, 4);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t.samples[0], 3.0);
  EXPECT_DOUBLE_EQ(t.start_time, 1.3);
  EXPECT_THROW((void)s.slice(8, 5), InvalidArgument);
  const TimeSeries tr = s.trimmed(0.2);
  ASSERT_EQ(tr.size(), 6u);
  EXPECT_EQ(tr.samples.front(), 2.0);
}

TEST(Statistics, MeanRmsVariance) {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(mean(x), 2.5);
  EXPECT_DOUBLE_EQ(variance(x), 1.25);
  EXPECT_DOUBLE_EQ(rms(x), std::sqrt(7.5));
}

TEST(CircuitSpec, ValidationRules) {
  EXPECT_NO_THROW(validate(CircuitSpec{RcNonlinG{100.0, 1e-13, 0.01}}));
  EXPECT_THROW(validate(CircuitSpec{RcNonlinG{0.0, 1e-13, 0.01}}), InvalidArgument);
  EXPECT_THROW(validate(CircuitSpec{RcNonlinC{100.0, -1e-13, 0.0}}), InvalidArgument);
  EXPECT_THROW(validate(CircuitSpec{LinGNonlinCap{0.0, 1e-13}}), InvalidArgument);
  EXPECT_THROW(
      validate(CircuitSpec{Memoryless{1.0, std::numeric_limits<double>::quiet_NaN()}}),
      InvalidArgument);
}

TEST(CircuitSpec, RcFamiliesMapToGeneralForm) {
  const RcNonlinGC g = as_rc_gc(RcNonlinG{10.0, 2e-12, 0.3});
  EXPECT_EQ(g.C1, 0.0);
  EXPECT_EQ(g.g2, 0.3);
  const RcNonlinGC c = as_rc_gc(RcNonlinC{10.0, 2e-12, 4e-12});
  EXPECT_EQ(c.g2, 0.0);
  EXPECT_EQ(c.C1, 4e-12);
  EXPECT_TRUE(is_rc_family(RcNonlinGC{}));
  EXPECT_FALSE(is_rc_family(Memoryless{}));
  EXPECT_EQ(circuit_name(LinCapNonlinG{}), "LinCapNonlinG");
}

TEST(Harmonic, NegativeAmplitudeFoldsIntoPhase) {
  const Harmonic h = make_harmonic(0, -2.5e-3, 0.0);
  EXPECT_DOUBLE_EQ(h.amplitude, 2.5e-3);
  EXPECT_DOUBLE_EQ(h.phase, kPi);
  EXPECT_NEAR(h.signed_dc(), -2.5e-3, 1e-18);
  const Harmonic k = make_harmonic(2, -1.0, 0.5);
  EXPECT_NEAR(k.phase, 0.5 - kPi, 1e-15);
}

TEST(Excitation, Validation) {
  EXPECT_THROW((Excitation{1.0, 0.0}.validate()), InvalidArgument);
  EXPECT_THROW((Excitation{-1.0, 1.0}.validate()), InvalidArgument);
  EXPECT_NO_THROW((Excitation{0.0, 1.0}.validate()));
  EXPECT_DOUBLE_EQ((Excitation{1.0, kTwoPi * 5.0}.frequency()), 5.0);
}

}  // namespace
}  // namespace nlnoise
