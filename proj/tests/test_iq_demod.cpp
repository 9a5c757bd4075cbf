#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <functional>

#include "nlnoise/error.hpp"
#include "nlnoise/iq_demod.hpp"
#include "nlnoise/spectral.hpp"

namespace nlnoise {
namespace {

constexpr double kF0 = 1e6;
constexpr double kW0 = kTwoPi * kF0;
constexpr double kFs = 64.0 * kF0;

TimeSeries make(std::size_t n, const std::function<double(double)>& f) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = f(double(i) / kFs);
  return TimeSeries(std::move(s), kFs);
}

double rms_diff(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / double(a.size()));
}

TEST(Hilbert, CosineMapsToSine) {
  const TimeSeries x = make(1u << 14, [](double t) { return std::cos(kW0 * t); });
  const TimeSeries h = hilbert_quadrature(x).trimmed(0.05);
  const TimeSeries ref =
      make(1u << 14, [](double t) { return std::sin(kW0 * t); }).trimmed(0.05);
  EXPECT_LT(rms_diff(h.samples, ref.samples) / rms(ref.view()), 0.005);
}

TEST(Hilbert, SineMapsToMinusCosine) {
  const TimeSeries x = make(1u << 14, [](double t) { return std::sin(kW0 * t + 0.3); });
  const TimeSeries h = hilbert_quadrature(x).trimmed(0.05);
  const TimeSeries ref =
      make(1u << 14, [](double t) { return -std::cos(kW0 * t + 0.3); }).trimmed(0.05);
  EXPECT_LT(rms_diff(h.samples, ref.samples) / rms(ref.view()), 0.005);
}

TEST(Hilbert, ZeroAndShortInput) {
  const TimeSeries h = hilbert_quadrature(TimeSeries(std::vector<double>(128, 0.0), 1.0));
  for (double v : h.samples) EXPECT_EQ(v, 0.0);
  EXPECT_THROW((void)hilbert_quadrature(TimeSeries(std::vector<double>(63, 1.0), 1.0)),
               InvalidArgument);
}

TEST(Hilbert, PreservesRmsOfBandLimitedSignal) {
  // Multi-tone band around f0, away from dc and Nyquist.
  const TimeSeries x = make(1u << 15, [](double t) {
    return 0.4 * std::cos(kW0 * t) + 0.2 * std::sin(1.7 * kW0 * t + 1.0) +
           0.1 * std::cos(3.1 * kW0 * t - 0.4);
  });
  const TimeSeries h = hilbert_quadrature(x).trimmed(0.05);
  EXPECT_NEAR(rms(h.view()) / rms(x.trimmed(0.05).view()), 1.0, 0.005);
}

TEST(ToneProjection, RecoversAmplitudeAndPhase) {
  const TimeSeries x = make(6400, [](double t) { return 0.7 * std::cos(kW0 * t - 0.9); });
  const std::complex<double> p = tone_phasor(x, kW0);
  EXPECT_NEAR(std::abs(p), 0.7, 1e-12);
  EXPECT_NEAR(std::arg(p), -0.9, 1e-12);
}

TEST(Lowpass, MagnitudeShape) {
  const ZeroPhaseLowpass lp(1e3, 1e5);
  EXPECT_NEAR(lp.magnitude(0.0), 1.0, 1e-12);
  EXPECT_NEAR(lp.magnitude(1e3), 0.5, 1e-9);  // -3 dB per pass
  EXPECT_LT(lp.magnitude(2e4), 1e-6);         // >= 60 dB at 20x cutoff
  EXPECT_THROW(ZeroPhaseLowpass(6e4, 1e5), InvalidArgument);
}

TEST(Lowpass, ZeroPhaseOnSlowTone) {
  const ZeroPhaseLowpass lp(1e3, 1e5);
  std::vector<double> s(1u << 14);
  for (std::size_t n = 0; n < s.size(); ++n) s[n] = std::cos(kTwoPi * 100.0 * n / 1e5);
  const std::vector<double> y = lp.apply(s);
  const double g = std::sqrt(lp.magnitude(100.0));
  for (std::size_t n = 4000; n < 12000; n += 500) EXPECT_NEAR(y[n], g * s[n], 1e-6);
}

TEST(Lockin, AmTone) {
  const double wm = kW0 / 100.0;
  const TimeSeries x = make(1u << 17, [&](double t) {
    return (1.0 + 0.01 * std::cos(wm * t)) * std::cos(kW0 * t);
  });
  const IqDecomposition d = lockin_decompose(x, kW0);
  EXPECT_NEAR(d.carrier_amp, 1.0, 1e-4);
  EXPECT_NEAR(d.carrier_phase, 0.0, 1e-4);
  EXPECT_DOUBLE_EQ(d.lp_cutoff, kF0 / 20.0);
  EXPECT_EQ(d.lp_order, 4);
  ASSERT_EQ(d.inphase.size(), d.quadrature.size());
  EXPECT_DOUBLE_EQ(d.inphase.sample_rate, d.quadrature.sample_rate);
  const TimeSeries ni = d.inphase.trimmed(0.05);
  const TimeSeries nq = d.quadrature.trimmed(0.05);
  std::vector<double> ref(ni.size());
  for (std::size_t i = 0; i < ni.size(); ++i) {
    ref[i] = 0.01 * std::cos(wm * ni.time(i)) * d.carrier_amp;
  }
  EXPECT_LT(rms_diff(ni.samples, ref), 0.01 * rms(ref));
  EXPECT_LT(rms(nq.view()), 1e-3 * rms(ref));
}

TEST(Lockin, PmToneSignConvention) {
  const double wm = kW0 / 100.0;
  const TimeSeries x =
      make(1u << 17, [&](double t) { return std::cos(kW0 * t - 0.01 * std::cos(wm * t)); });
  const IqDecomposition d = lockin_decompose(x, kW0);
  const TimeSeries ni = d.inphase.trimmed(0.05);
  const TimeSeries nq = d.quadrature.trimmed(0.05);
  std::vector<double> ref(nq.size());
  std::vector<double> q(nq.size());
  for (std::size_t i = 0; i < nq.size(); ++i) {
    ref[i] = 0.01 * std::cos(wm * nq.time(i));
    q[i] = nq.samples[i] / d.carrier_amp;
  }
  EXPECT_LT(rms_diff(q, ref), 0.01 * rms(ref));
  EXPECT_LT(rms(ni.view()), 1e-4);
  // phi_n = -n_Q / X1 recovers the applied phase -0.01 cos(wm t).
  const AmPmProcesses p = to_am_pm(d);
  std::vector<double> applied(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) applied[i] = -ref[i];
  EXPECT_LT(rms_diff(p.phi_n.trimmed(0.05).samples, applied), 0.01 * rms(ref));
  EXPECT_FALSE(p.large_deviation);
}

TEST(Lockin, PureCarrier) {
  const TimeSeries x = make(1u << 16, [](double t) { return 2.0 * std::cos(kW0 * t + 0.4); });
  const IqDecomposition d = lockin_decompose(x, kW0);
  EXPECT_NEAR(d.carrier_amp, 2.0, 1e-12);
  EXPECT_NEAR(d.carrier_phase, 0.4, 1e-12);
  EXPECT_LT(rms(d.inphase.trimmed(0.05).view()), 1e-9 * d.carrier_amp);
  EXPECT_LT(rms(d.quadrature.trimmed(0.05).view()), 1e-9 * d.carrier_amp);
}

TEST(Lockin, BasebandCarriesLowFrequencyContent) {
  const double wm = kW0 / 200.0;
  const TimeSeries x = make(1u << 17, [&](double t) {
    return std::cos(kW0 * t) + 0.05 + 0.02 * std::cos(wm * t);
  });
  const IqDecomposition d = lockin_decompose(x, kW0);
  const TimeSeries bb = d.baseband.trimmed(0.05);
  EXPECT_NEAR(rms(bb.view()), 0.02 / std::sqrt(2.0), 2e-4);
}

TEST(Lockin, Errors) {
  const TimeSeries x = make(1u << 14, [](double t) { return std::cos(kW0 * t); });
  EXPECT_THROW((void)lockin_decompose(x, kW0, 0.6 * kF0), InvalidArgument);
  EXPECT_THROW((void)lockin_decompose(x, -kW0), InvalidArgument);
  EXPECT_THROW((void)lockin_decompose(TimeSeries(std::vector<double>(1u << 14, 0.0), kFs), kW0),
               InvalidArgument);
}

TEST(Lockin, DefaultDecimationKeepsRate) {
  const std::size_t d = default_decimation(kFs, kF0 / 20.0);
  EXPECT_GE(kFs / double(d), 20.0 * kF0 / 20.0);
  EXPECT_LT(kFs / double(d + 1), 20.0 * kF0 / 20.0);
}

TEST(AmPm, Definitions) {
  IqDecomposition d;
  d.carrier_amp = 0.5;
  d.inphase = TimeSeries(std::vector<double>(8, 0.02 * 0.5), 1.0);
  d.quadrature = TimeSeries(std::vector<double>(8, 0.03 * 0.5), 1.0);
  AmPmProcesses p = to_am_pm(d);
  for (double v : p.a_n.samples) EXPECT_DOUBLE_EQ(v, 0.02);
  for (double v : p.phi_n.samples) EXPECT_DOUBLE_EQ(v, -0.03);
  d.inphase = TimeSeries(std::vector<double>(8, 0.0), 1.0);
  d.quadrature = d.inphase;
  p = to_am_pm(d);
  for (double v : p.a_n.samples) EXPECT_EQ(v, 0.0);
  for (double v : p.phi_n.samples) EXPECT_EQ(v, 0.0);
  d.carrier_amp = 0.0;
  EXPECT_THROW((void)to_am_pm(d), InvalidArgument);
}

TEST(AmPm, LargeDeviationFlag) {
  IqDecomposition d;
  d.carrier_amp = 1.0;
  d.inphase = TimeSeries(std::vector<double>(8, 0.2), 1.0);
  d.quadrature = TimeSeries(std::vector<double>(8, 0.0), 1.0);
  EXPECT_TRUE(to_am_pm(d).large_deviation);
}

// Record of 6400 samples holds 100 carrier periods and one period of wm.
constexpr std::size_t kSplitN = 6400;
constexpr double kWm = kW0 / 100.0;

TEST(SidebandSplit, PureAm) {
  const TimeSeries x = make(kSplitN, [](double t) {
    return 0.8 * (1.0 + 0.003 * std::cos(kWm * t)) * std::cos(kW0 * t + 0.2);
  });
  const SidebandSplit s = sideband_split(x, kW0, kWm);
  EXPECT_NEAR(std::abs(s.am - 0.003), 0.0, 1e-6);
  EXPECT_LT(std::abs(s.pm), 1e-6);
  EXPECT_NEAR(std::abs(s.carrier), 0.8, 1e-12);
}

TEST(SidebandSplit, NarrowbandPm) {
  const double beta = 0.004;
  const TimeSeries x = make(
      kSplitN, [&](double t) { return std::cos(kW0 * t + beta * std::cos(kWm * t)); });
  const SidebandSplit s = sideband_split(x, kW0, kWm);
  EXPECT_NEAR(std::abs(s.pm - beta), 0.0, beta * beta);
  EXPECT_LT(std::abs(s.am), beta * beta / 2.0);
}

TEST(SidebandSplit, CombinedAmAndPm) {
  const double m = 0.002;
  const double beta = 0.003;
  const TimeSeries x = make(kSplitN, [&](double t) {
    return (1.0 + m * std::cos(kWm * t)) * std::cos(kW0 * t + beta * std::cos(kWm * t));
  });
  const SidebandSplit s = sideband_split(x, kW0, kWm);
  EXPECT_NEAR(s.am.real(), m, 0.01 * m);
  EXPECT_NEAR(s.pm.real(), beta, 0.01 * beta);
}

TEST(SidebandSplit, Errors) {
  const TimeSeries x = make(kSplitN, [](double t) { return std::cos(kW0 * t); });
  EXPECT_THROW((void)sideband_split(x, kW0, 0.0), InvalidArgument);
  EXPECT_THROW((void)sideband_split(x, kW0, kW0 / 100.0 * 1.37), InvalidArgument);
}

// Round trip: x = X1 (1 + a_n) cos(w0 t + phi_n) with slow random-ish
// a_n, phi_n of peak <= 0.01.
TEST(Properties, RoundTripRecoversAmPm) {
  const double x1 = 0.35;
  auto a = [](double t) {
    return 0.004 * std::cos(kW0 / 150.0 * t) + 0.003 * std::sin(kW0 / 61.0 * t + 0.7);
  };
  auto ph = [](double t) {
    return 0.005 * std::sin(kW0 / 97.0 * t + 0.1) - 0.002 * std::cos(kW0 / 43.0 * t);
  };
  const TimeSeries x = make(1u << 17, [&](double t) {
    return x1 * (1.0 + a(t)) * std::cos(kW0 * t + ph(t));
  });
  const AmPmProcesses p = to_am_pm(lockin_decompose(x, kW0));
  const TimeSeries an = p.a_n.trimmed(0.05);
  const TimeSeries pn = p.phi_n.trimmed(0.05);
  std::vector<double> ra(an.size());
  std::vector<double> rp(pn.size());
  for (std::size_t i = 0; i < an.size(); ++i) {
    ra[i] = a(an.time(i));
    rp[i] = ph(pn.time(i));
  }
  EXPECT_LT(rms_diff(an.samples, ra), 0.02 * rms(ra));
  EXPECT_LT(rms_diff(pn.samples, rp), 0.02 * rms(rp));
}

TEST(Properties, SidebandSplitAgreesWithLockin) {
  const double x1 = 1.3;
  const double m = 0.004;
  const double w = kW0 / 64.0;
  const std::size_t n = 64 * 64 * 40;
  const TimeSeries x = make(n, [&](double t) {
    return x1 * (1.0 + m * std::cos(w * t + 0.5)) * std::cos(kW0 * t);
  });
  const SidebandSplit s = sideband_split(x, kW0, w);
  const AmPmProcesses p = to_am_pm(lockin_decompose(x, kW0));
  const double from_rms = rms(p.a_n.trimmed(0.05).view()) * std::sqrt(2.0);
  EXPECT_NEAR(std::abs(s.am) / from_rms, 1.0, 0.01);
}

}  // namespace
}  // namespace nlnoise
