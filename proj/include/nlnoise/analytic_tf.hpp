#pragma once

// Closed-form AM/PM noise transfer functions of second-order nonlinear
// circuits driven by a single tone, and the supporting harmonic, validity
// and cascade relations.
//
// Conventions: H_AM and H_PM are per unit of input baseband noise, so that
// a_n = H_AM x_n and phi_n = H_PM x_n. The RC families are written with
// x = R C0 w0 and the first-harmonic amplitude V_o1 = V1 / sqrt(1 + x^2).

#include <complex>
#include <vector>

#include "nlnoise/signal.hpp"

namespace nlnoise {

struct ValidityReport {
  bool small_signal_ok = true;
  double metric = 0.0;
  double threshold = 0.1;
};

/// Noise components at offset omega_m per unit input noise. h_i and h_q
/// are additionally divided by V_o1, so flags-off results equal
/// (H_AM, -H_PM).
struct CoupledTf {
  std::complex<double> h_bb;
  std::complex<double> h_i;
  std::complex<double> h_q;

  [[nodiscard]] NoiseTransfer noise_transfer() const {
    return {h_i, -h_q};
  }
};

/// Linear RC response 1 / (1 + j R C0 w).
[[nodiscard]] std::complex<double> rc_response(double R, double C0,
                                               double omega);

[[nodiscard]] NoiseTransfer closed_form_tf(const CircuitSpec& spec,
                                           const Excitation& exc);

/// Frequency-domain solution of the coupled baseband / in-phase /
/// quadrature noise equations of an RC family at offset omega_m.
/// keep_derivatives retains every d/dt coupling; keep_foldback retains the
/// AM-to-baseband term g2 R V_o1 v_I.
[[nodiscard]] CoupledTf coupled_tf(const CircuitSpec& spec,
                                   const Excitation& exc, double omega_m,
                                   bool keep_derivatives, bool keep_foldback);

/// dc, fundamental and second harmonic for RcNonlinG and RcNonlinC.
[[nodiscard]] std::vector<Harmonic> harmonic_prediction(const CircuitSpec& spec,
                                                        const Excitation& exc);

[[nodiscard]] ValidityReport validity(const CircuitSpec& spec,
                                      const Excitation& exc,
                                      double threshold = 0.1);

/// AM transfer of stage alpha followed by stage beta.
[[nodiscard]] double cascade_am(double h_am_first, double linear_gain_first,
                                double h_am_second);

/// Linear and second-order coefficients of a bipolar transistor at bias.
struct ExtractedCoeffs {
  double g_pi1 = 0.0;  // S
  double g_pi2 = 0.0;  // S/V
  double g_m1 = 0.0;   // S
  double g_m2 = 0.0;   // S/V
  double c_pi0 = 0.0;  // F
  double c_pi1 = 0.0;  // F/V
  double bias_vbe = 0.0;
  double bias_ic = 0.0;
};

struct TerminalResistances {
  double r_b = 0.0;  // rbx_t + rbi
  double r_e = 0.0;  // re_t
};

/// Equivalent RC drive of the inner base-emitter node.
struct BjtEquivalent {
  ExtractedCoeffs coeffs;
  TerminalResistances res;

  /// k = 1 + g_pi1 (R_B + R_E) + g_m1 R_E.
  [[nodiscard]] double k() const;
  /// R = (R_B + R_E)/k, C0 = C_pi0, C1 = C_pi1,
  /// g2 = (g_pi2 (R_B + R_E) + g_m2 R_E) / (R_B + R_E).
  [[nodiscard]] RcNonlinGC equivalent_rc() const;
  /// Throws InvalidArgument on a nonphysical mapping.
  void validate() const;
};

/// Collector-current AM/PM transfer per unit base noise current (1/A,
/// rad/A).
[[nodiscard]] NoiseTransfer bipolar_tf(const ExtractedCoeffs& coeffs,
                                       const TerminalResistances& res,
                                       const Excitation& exc);

}  // namespace nlnoise
