#pragma once

// Curve-tracer extraction of bipolar coefficients: sweep operating points,
// remove the terminal resistance drops, then differentiate the small-signal
// parameters with respect to the inner base-emitter voltage.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "nlnoise/analytic_tf.hpp"

namespace nlnoise {

/// One operating point, named after the simulator quantities it mirrors.
struct BjtOpRow {
  double v_bxex = 0.0;  // V, external base-emitter
  double i_b = 0.0;     // A
  double i_c = 0.0;     // A
  double gpi = 0.0;     // S
  double gm = 0.0;      // S
  double cpi = 0.0;     // F
  double rbi = 0.0;     // ohm
  double rbx_t = 0.0;   // ohm
  double re_t = 0.0;    // ohm

  bool operator==(const BjtOpRow&) const = default;
};

/// Operating point with the de-embedded inner base-emitter voltage.
struct InnerRow {
  BjtOpRow row;
  double v_be = 0.0;
};

/// Exponential stand-in device:
///   i_c = i_s exp(v_be / v_t), i_b = i_c / beta,
///   cpi = c_je0 / (1 - v_be / v_j)^m_j + tau_f gm.
struct SyntheticDevice {
  double i_s = 1e-17;
  double beta = 100.0;
  double v_t = 25.85e-3;
  double c_je0 = 20e-15;
  double v_j = 1.0;
  double m_j = 0.5;
  double tau_f = 1e-12;
  double r_b = 100.0;
  double r_e = 3.0;

  void validate() const;
  [[nodiscard]] double i_c(double v_be) const;
  [[nodiscard]] double gm(double v_be) const;
  [[nodiscard]] double gpi(double v_be) const;
  [[nodiscard]] double cpi(double v_be) const;
  /// Inner v_be giving the collector current i_c.
  [[nodiscard]] double v_be_at(double i_c) const;
  /// Exact coefficients at v_be (same scale factors as extract_coeffs).
  [[nodiscard]] ExtractedCoeffs analytic_coeffs(double v_be) const;
  [[nodiscard]] TerminalResistances resistances() const { return {r_b, r_e}; }
};

/// n evenly spaced voltages from lo to hi inclusive.
[[nodiscard]] std::vector<double> linear_sweep(double lo, double hi,
                                               std::size_t n);

/// One row per external voltage; each inner v_be is found by a bracketed
/// Newton solve of v_bxex = v_be + r_b i_b + r_e (i_b + i_c).
[[nodiscard]] std::vector<BjtOpRow> trace_curves(
    const SyntheticDevice& dev, const std::vector<double>& v_sweep);

/// v_be = v_bxex - (rbx_t + rbi) i_b - re_t (i_b + i_c); the result must be
/// strictly increasing.
[[nodiscard]] std::vector<InnerRow> de_embed(const std::vector<BjtOpRow>& rows);

/// Rows taken at face value (v_be = v_bxex), for comparison with de_embed.
[[nodiscard]] std::vector<InnerRow> without_de_embedding(
    const std::vector<BjtOpRow>& rows);

/// Coefficients at bias_vbe from 3-point Lagrange interpolation on the
/// non-uniform v_be grid around the nearest node:
///   g_pi1 = gpi, g_pi2 = gpi'/2, g_m1 = gm, g_m2 = gm'/2,
///   C_pi0 = cpi, C_pi1 = 2 cpi'.
[[nodiscard]] ExtractedCoeffs extract_coeffs(const std::vector<InnerRow>& rows,
                                             double bias_vbe);

/// Inner v_be at collector current i_c, interpolating log(i_c) linearly.
[[nodiscard]] double bias_for_ic(const std::vector<InnerRow>& rows, double i_c);

/// Terminal resistances recorded in the table row nearest bias_vbe.
[[nodiscard]] TerminalResistances table_resistances(
    const std::vector<InnerRow>& rows, double bias_vbe);

inline constexpr const char* kOpTableHeader =
    "v_bxex,i_b,i_c,gpi,gm,cpi,rbi,rbx_t,re_t";

/// Throws SchemaError on header mismatch, malformed cells or values outside
/// plausible device ranges.
[[nodiscard]] std::vector<BjtOpRow> parse_op_table(const std::string& text);
[[nodiscard]] std::vector<BjtOpRow> import_op_table(
    const std::filesystem::path& path);
[[nodiscard]] std::string format_op_table(const std::vector<BjtOpRow>& rows);
void export_op_table(const std::filesystem::path& path,
                     const std::vector<BjtOpRow>& rows);

}  // namespace nlnoise
