#include "nlnoise/analytic_tf.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "nlnoise/error.hpp"

namespace nlnoise {

namespace {

using cd = std::complex<double>;

// Closed forms of the general RC circuit; the G and C families are the
// C1 = 0 and g2 = 0 specialisations.
NoiseTransfer rc_gc_closed_form(const RcNonlinGC& c, double w0) {
  const double x = c.R * c.C0 * w0;
  const double den = 1.0 + x * x;
  const double h_am = -(2.0 * c.g2 * c.R + c.R * c.R * c.C0 * c.C1 * w0 * w0) / den;
  const double h_pm =
      (-c.R * c.C1 * w0 + 2.0 * c.g2 * c.R * c.R * c.C0 * w0) / den;
  return {h_am, h_pm};
}

double first_harmonic_amplitude(const RcNonlinGC& c, const Excitation& exc) {
  return std::abs(rc_response(c.R, c.C0, exc.omega0)) * exc.amplitude;
}

}  // namespace

cd rc_response(double R, double C0, double omega) {
  return 1.0 / cd(1.0, R * C0 * omega);
}

NoiseTransfer closed_form_tf(const CircuitSpec& spec, const Excitation& exc) {
  validate(spec);
  exc.validate();
  const double w0 = exc.omega0;

  if (const auto* m = std::get_if<Memoryless>(&spec)) {
    if (m->alpha1 == 0.0) {
      throw InvalidArgument("Memoryless: alpha1 = 0 leaves no carrier");
    }
    return {2.0 * m->alpha2 / m->alpha1, 0.0};
  }
  if (const auto* c = std::get_if<LinCapNonlinG>(&spec)) {
    if (c->C0 == 0.0) {
      throw InvalidArgument("LinCapNonlinG: C0 = 0 is a degenerate element");
    }
    return {0.0, -2.0 * c->g2 / (c->C0 * w0)};
  }
  if (const auto* c = std::get_if<LinGNonlinCap>(&spec)) {
    return {0.0, c->C1 * w0 / c->g1};
  }
  return rc_gc_closed_form(as_rc_gc(spec), w0);
}

CoupledTf coupled_tf(const CircuitSpec& spec, const Excitation& exc,
                     double omega_m, bool keep_derivatives,
                     bool keep_foldback) {
  validate(spec);
  exc.validate();
  if (!is_rc_family(spec)) {
    throw InvalidArgument("coupled_tf applies to the series-RC families only");
  }
  if (!(omega_m >= 0.0) || !(omega_m < exc.omega0 / 10.0)) {
    throw InvalidArgument("coupled_tf requires 0 <= omega_m < omega0/10");
  }
  const RcNonlinGC c = as_rc_gc(spec);
  const double w0 = exc.omega0;
  const double v1 = first_harmonic_amplitude(c, exc);
  const double tau = c.R * c.C0;
  const double x = tau * w0;
  const double a = c.g2 * c.R * v1;  // conductance mixing
  const double b = c.R * c.C1 * v1;  // capacitance mixing
  const cd s = keep_derivatives ? cd(0.0, omega_m) : cd(0.0, 0.0);
  const cd d = 1.0 + s * tau;

  // Unknowns (v_BB, v_I, v_Q), source v_in = 1:
  //   D v_BB + (a [fold] + b s / 2) v_I            = v_in
  //   D v_I  + (2a + b s) v_BB + x v_Q             = 0
  //   D v_Q  - x v_I - b w0 v_BB                   = 0
  Eigen::Matrix3cd m;
  m << d, (keep_foldback ? cd(a) : cd(0.0)) + 0.5 * b * s, 0.0,
      2.0 * a + b * s, d, x,
      -b * w0, -x, d;
  Eigen::Vector3cd rhs(1.0, 0.0, 0.0);
  const auto lu = m.fullPivLu();
  if (lu.rank() < 3) {
    throw ConvergenceError("coupled_tf: singular noise system");
  }
  const Eigen::Vector3cd sol = lu.solve(rhs);
  if (v1 == 0.0) {
    // V_o1 -> 0 limit of the normalized components: first order in the
    // mixing terms, driven by v_BB = 1/D.
    const double ga = c.g2 * c.R;
    const double gb = c.R * c.C1;
    const cd bb = 1.0 / d;
    Eigen::Matrix2cd iq;
    iq << d, x, -x, d;
    const Eigen::Vector2cd src(-(2.0 * ga + gb * s) * bb, gb * w0 * bb);
    const Eigen::Vector2cd lim = iq.fullPivLu().solve(src);
    return {sol(0), lim(0), lim(1)};
  }
  return {sol(0), sol(1) / v1, sol(2) / v1};
}

std::vector<Harmonic> harmonic_prediction(const CircuitSpec& spec,
                                          const Excitation& exc) {
  validate(spec);
  exc.validate();
  const bool g_family = std::holds_alternative<RcNonlinG>(spec);
  const bool c_family = std::holds_alternative<RcNonlinC>(spec);
  if (!g_family && !c_family) {
    throw InvalidArgument(
        "harmonic_prediction supports RcNonlinG and RcNonlinC only");
  }
  const RcNonlinGC c = as_rc_gc(spec);
  const double w0 = exc.omega0;
  const cd h1 = rc_response(c.R, c.C0, w0);
  const cd h2 = rc_response(c.R, c.C0, 2.0 * w0);
  const double v1 = std::abs(h1) * exc.amplitude;
  const double phi1 = std::arg(h1);

  std::vector<Harmonic> out;
  if (g_family) {
    out.push_back(make_harmonic(0, -0.5 * c.g2 * c.R * v1 * v1, 0.0));
    out.push_back(make_harmonic(1, v1, phi1));
    out.push_back(make_harmonic(2, 0.5 * c.g2 * c.R * std::abs(h2) * v1 * v1,
                                2.0 * phi1 + std::arg(h2) + kPi));
  } else {
    out.push_back(make_harmonic(0, 0.0, 0.0));
    out.push_back(make_harmonic(1, v1, phi1));
    out.push_back(
        make_harmonic(2, 0.5 * c.R * c.C1 * w0 * std::abs(h2) * v1 * v1,
                      2.0 * phi1 + std::arg(h2) - 0.5 * kPi));
  }
  return out;
}

ValidityReport validity(const CircuitSpec& spec, const Excitation& exc,
                        double threshold) {
  validate(spec);
  exc.validate();
  const double inf = std::numeric_limits<double>::infinity();
  const double v = exc.amplitude;
  const double w0 = exc.omega0;
  double metric = 0.0;

  if (const auto* m = std::get_if<Memoryless>(&spec)) {
    metric = m->alpha2 == 0.0 ? 0.0
             : m->alpha1 == 0.0 ? inf
                                : std::abs(m->alpha2 * v / m->alpha1);
  } else if (const auto* c = std::get_if<LinCapNonlinG>(&spec)) {
    metric = c->g2 == 0.0 ? 0.0
             : c->C0 == 0.0 ? inf
                            : std::abs(c->g2 * v / (c->C0 * w0));
  } else if (const auto* c = std::get_if<LinGNonlinCap>(&spec)) {
    metric = std::abs(c->C1 * v * w0 / c->g1);
  } else {
    const RcNonlinGC rc = as_rc_gc(spec);
    const double v1 = first_harmonic_amplitude(rc, exc);
    metric = std::max(std::abs(rc.g2 * rc.R * v1),
                      std::abs(rc.R * rc.C1 * v1 * w0));
  }
  return {metric <= threshold, metric, threshold};
}

double cascade_am(double h_am_first, double linear_gain_first,
                  double h_am_second) {
  return h_am_first + linear_gain_first * h_am_second;
}

double BjtEquivalent::k() const {
  const double rsum = res.r_b + res.r_e;
  return 1.0 + coeffs.g_pi1 * rsum + coeffs.g_m1 * res.r_e;
}

void BjtEquivalent::validate() const {
  for (double v : {coeffs.g_pi1, coeffs.g_pi2, coeffs.g_m1, coeffs.g_m2,
                   coeffs.c_pi0, coeffs.c_pi1, res.r_b, res.r_e}) {
    if (!std::isfinite(v)) {
      throw InvalidArgument("bipolar coefficients must be finite");
    }
  }
  if (!(coeffs.g_m1 > 0.0)) throw InvalidArgument("g_m1 must be > 0");
  if (res.r_b < 0.0 || res.r_e < 0.0) {
    throw InvalidArgument("R_B and R_E must be >= 0");
  }
  if (!(res.r_b + res.r_e > 0.0)) {
    throw InvalidArgument("R_B + R_E = 0 leaves the RC mapping undefined");
  }
  if (!(k() > 0.0)) throw InvalidArgument("nonphysical mapping: k <= 0");
}

RcNonlinGC BjtEquivalent::equivalent_rc() const {
  validate();
  const double rsum = res.r_b + res.r_e;
  return {rsum / k(), coeffs.c_pi0,
          (coeffs.g_pi2 * rsum + coeffs.g_m2 * res.r_e) / rsum, coeffs.c_pi1};
}

NoiseTransfer bipolar_tf(const ExtractedCoeffs& coeffs,
                         const TerminalResistances& res,
                         const Excitation& exc) {
  const BjtEquivalent eq{coeffs, res};
  const RcNonlinGC rc = eq.equivalent_rc();
  const Excitation inner{exc.amplitude / eq.k(), exc.omega0};
  const NoiseTransfer stage2 = closed_form_tf(rc, inner);
  // Base noise current enters the RC form as -(R_B + R_E)/k * i_nB.
  const double scale = -(res.r_b + res.r_e) / eq.k();
  const double h_am3 = 2.0 * coeffs.g_m2 / coeffs.g_m1;
  return {scale * (stage2.h_am.real() + h_am3), scale * stage2.h_pm.real()};
}

}  // namespace nlnoise
