#include "nlnoise/bjt_extract.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nlnoise/error.hpp"

namespace nlnoise {

namespace {

constexpr double kMaxSpacing = 5e-3;  // V

struct Quadratic {
  // Lagrange basis weights for the value and first derivative at x.
  std::array<double, 3> value;
  std::array<double, 3> slope;
};

Quadratic lagrange3(double x0, double x1, double x2, double x) {
  const double d0 = (x0 - x1) * (x0 - x2);
  const double d1 = (x1 - x0) * (x1 - x2);
  const double d2 = (x2 - x0) * (x2 - x1);
  Quadratic q{};
  q.value = {(x - x1) * (x - x2) / d0, (x - x0) * (x - x2) / d1,
             (x - x0) * (x - x1) / d2};
  q.slope = {(2.0 * x - x1 - x2) / d0, (2.0 * x - x0 - x2) / d1,
             (2.0 * x - x0 - x1) / d2};
  return q;
}

void check_range(double v, double lo, double hi, const char* name,
                 std::size_t line) {
  if (!(v >= lo && v <= hi)) {
    std::ostringstream os;
    os << "line " << line << ": " << name << " = " << v << " outside ["
       << lo << ", " << hi << "]";
    throw SchemaError(os.str());
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, const char* name, std::size_t line) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  double v = 0.0;
  const auto res = std::from_chars(first, last, v);
  if (first == last || res.ec != std::errc() || res.ptr != last ||
      !std::isfinite(v)) {
    std::ostringstream os;
    os << "line " << line << ": non-numeric " << name << " cell '" << cell
       << "'";
    throw SchemaError(os.str());
  }
  return v;
}

}  // namespace

void SyntheticDevice::validate() const {
  for (double v : {i_s, beta, v_t, c_je0, v_j, tau_f}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("synthetic device parameters must be finite and > 0");
    }
  }
  if (!(r_b >= 0.0) || !(r_e >= 0.0) || !std::isfinite(r_b) ||
      !std::isfinite(r_e)) {
    throw InvalidArgument("terminal resistances must be finite and >= 0");
  }
  if (!(m_j > 0.0 && m_j < 1.0)) {
    throw InvalidArgument("m_j must lie in (0, 1)");
  }
}

double SyntheticDevice::i_c(double v_be) const { return i_s * std::exp(v_be / v_t); }
double SyntheticDevice::gm(double v_be) const { return i_c(v_be) / v_t; }
double SyntheticDevice::gpi(double v_be) const { return gm(v_be) / beta; }

double SyntheticDevice::cpi(double v_be) const {
  if (!(v_be < 0.95 * v_j)) {
    throw InvalidArgument("v_be beyond the junction-capacitance guard 0.95 v_j");
  }
  return c_je0 / std::pow(1.0 - v_be / v_j, m_j) + tau_f * gm(v_be);
}

double SyntheticDevice::v_be_at(double target_ic) const {
  if (!(target_ic > 0.0)) throw InvalidArgument("i_c must be > 0");
  return v_t * std::log(target_ic / i_s);
}

ExtractedCoeffs SyntheticDevice::analytic_coeffs(double v_be) const {
  ExtractedCoeffs c;
  const double g = gm(v_be);
  c.g_m1 = g;
  c.g_m2 = 0.5 * g / v_t;
  c.g_pi1 = g / beta;
  c.g_pi2 = 0.5 * g / (beta * v_t);
  c.c_pi0 = cpi(v_be);
  const double dj = c_je0 * m_j / v_j * std::pow(1.0 - v_be / v_j, -m_j - 1.0);
  c.c_pi1 = 2.0 * (dj + tau_f * g / v_t);
  c.bias_vbe = v_be;
  c.bias_ic = i_c(v_be);
  return c;
}

std::vector<double> linear_sweep(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw InvalidArgument("sweep needs n >= 2 and hi > lo");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

std::vector<BjtOpRow> trace_curves(const SyntheticDevice& dev,
                                   const std::vector<double>& v_sweep) {
  dev.validate();
  const double limit = 0.95 * dev.v_j;
  auto drop = [&](double vbe) {
    const double ic = dev.i_c(vbe);
    const double ib = ic / dev.beta;
    return vbe + dev.r_b * ib + dev.r_e * (ib + ic);
  };

  std::vector<BjtOpRow> rows;
  rows.reserve(v_sweep.size());
  for (double vx : v_sweep) {
    if (!std::isfinite(vx)) throw InvalidArgument("sweep values must be finite");
    // f(v) = drop(v) - vx is increasing; the root lies in [lo, min(vx, limit)].
    double hi = std::min(vx, limit);
    if (drop(hi) < vx) {
      throw InvalidArgument("sweep reaches the junction guard v_be >= 0.95 v_j");
    }
    double lo = std::min(vx, 0.0) - 1.0;
    double v = hi;
    bool done = false;
    for (int it = 0; it < 200; ++it) {
      const double f = drop(v) - vx;
      if (f > 0.0) hi = v; else lo = v;
      const double ic = dev.i_c(v);
      const double df = 1.0 + (dev.r_b / dev.beta + dev.r_e * (1.0 + 1.0 / dev.beta)) *
                                  ic / dev.v_t;
      double next = v - f / df;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - v) <= 1e-15 * std::max(1.0, std::abs(v)) ||
          hi - lo <= 1e-15) {
        v = next;
        done = true;
        break;
      }
      v = next;
    }
    if (!done) throw ConvergenceError("trace_curves: root finder did not converge");
    if (!(v < limit)) {
      throw InvalidArgument("sweep reaches the junction guard v_be >= 0.95 v_j");
    }
    BjtOpRow r;
    r.v_bxex = vx;
    r.i_c = dev.i_c(v);
    r.i_b = r.i_c / dev.beta;
    r.gm = dev.gm(v);
    r.gpi = dev.gpi(v);
    r.cpi = dev.cpi(v);
    r.rbi = 0.0;
    r.rbx_t = dev.r_b;
    r.re_t = dev.r_e;
    rows.push_back(r);
  }
  return rows;
}

std::vector<InnerRow> de_embed(const std::vector<BjtOpRow>& rows) {
  std::vector<InnerRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const double v = r.v_bxex - (r.rbx_t + r.rbi) * r.i_b - r.re_t * (r.i_b + r.i_c);
    if (!out.empty() && !(v > out.back().v_be)) {
      throw InvalidArgument("de-embedded v_be is not strictly increasing");
    }
    out.push_back({r, v});
  }
  return out;
}

std::vector<InnerRow> without_de_embedding(const std::vector<BjtOpRow>& rows) {
  std::vector<InnerRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (!out.empty() && !(r.v_bxex > out.back().v_be)) {
      throw InvalidArgument("v_bxex is not strictly increasing");
    }
    out.push_back({r, r.v_bxex});
  }
  return out;
}

ExtractedCoeffs extract_coeffs(const std::vector<InnerRow>& rows,
                               double bias_vbe) {
  const std::size_t n = rows.size();
  if (n < 5) throw InvalidArgument("extract_coeffs needs at least 5 rows");
  if (!(bias_vbe > rows.front().v_be && bias_vbe < rows.back().v_be)) {
    throw InvalidArgument("bias_vbe lies outside the de-embedded grid");
  }
  const auto it = std::lower_bound(
      rows.begin(), rows.end(), bias_vbe,
      [](const InnerRow& r, double v) { return r.v_be < v; });
  auto j = static_cast<std::size_t>(it - rows.begin());
  if (j > 0 && bias_vbe - rows[j - 1].v_be < rows[j].v_be - bias_vbe) --j;
  if (j < 2 || j + 2 >= n) {
    throw InvalidArgument("bias_vbe needs at least 2 grid neighbours on each side");
  }
  const double x0 = rows[j - 1].v_be;
  const double x1 = rows[j].v_be;
  const double x2 = rows[j + 1].v_be;
  if (x1 - x0 > kMaxSpacing || x2 - x1 > kMaxSpacing) {
    throw InvalidArgument("v_be grid spacing above 5 mV near the bias is too coarse");
  }
  const Quadratic q = lagrange3(x0, x1, x2, bias_vbe);
  auto eval = [&](double BjtOpRow::*field, const std::array<double, 3>& w) {
    return w[0] * (rows[j - 1].row.*field) + w[1] * (rows[j].row.*field) +
           w[2] * (rows[j + 1].row.*field);
  };

  ExtractedCoeffs c;
  c.g_pi1 = eval(&BjtOpRow::gpi, q.value);
  c.g_pi2 = 0.5 * eval(&BjtOpRow::gpi, q.slope);
  c.g_m1 = eval(&BjtOpRow::gm, q.value);
  c.g_m2 = 0.5 * eval(&BjtOpRow::gm, q.slope);
  c.c_pi0 = eval(&BjtOpRow::cpi, q.value);
  c.c_pi1 = 2.0 * eval(&BjtOpRow::cpi, q.slope);
  c.bias_vbe = bias_vbe;
  c.bias_ic = eval(&BjtOpRow::i_c, q.value);
  for (double v : {c.g_pi1, c.g_pi2, c.g_m1, c.g_m2, c.c_pi0, c.c_pi1}) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite extracted coefficient");
  }
  if (!(c.g_m1 > 0.0)) throw InvalidArgument("g_m1 <= 0: bias is not forward active");
  return c;
}

double bias_for_ic(const std::vector<InnerRow>& rows, double i_c) {
  if (!(i_c > 0.0)) throw InvalidArgument("target i_c must be > 0");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double a = rows[i - 1].row.i_c;
    const double b = rows[i].row.i_c;
    if (a > 0.0 && b > 0.0 && i_c >= a && i_c <= b) {
      const double f = (std::log(i_c) - std::log(a)) / (std::log(b) - std::log(a));
      return rows[i - 1].v_be + f * (rows[i].v_be - rows[i - 1].v_be);
    }
  }
  throw InvalidArgument("target i_c is outside the table");
}

TerminalResistances table_resistances(const std::vector<InnerRow>& rows,
                                      double bias_vbe) {
  if (rows.empty()) throw InvalidArgument("empty table");
  const auto best = std::min_element(
      rows.begin(), rows.end(), [&](const InnerRow& a, const InnerRow& b) {
        return std::abs(a.v_be - bias_vbe) < std::abs(b.v_be - bias_vbe);
      });
  return {best->row.rbx_t + best->row.rbi, best->row.re_t};
}

std::vector<BjtOpRow> parse_op_table(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("empty operating-point table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kOpTableHeader) {
    throw SchemaError(std::string("header must be exactly '") + kOpTableHeader +
                      "', got '" + line + "'");
  }
  static constexpr std::array<const char*, 9> kNames = {
      "v_bxex", "i_b", "i_c", "gpi", "gm", "cpi", "rbi", "rbx_t", "re_t"};

  std::vector<BjtOpRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != kNames.size()) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 9 cells, got " << cells.size();
      throw SchemaError(os.str());
    }
    std::array<double, 9> v{};
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = parse_cell(cells[k], kNames[k], line_no);
    }
    BjtOpRow r{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
    check_range(r.v_bxex, -5.0, 5.0, "v_bxex", line_no);
    check_range(r.i_b, 0.0, 1.0, "i_b", line_no);
    check_range(r.i_c, 0.0, 10.0, "i_c", line_no);
    check_range(r.gpi, 1e-12, 10.0, "gpi", line_no);
    check_range(r.gm, 1e-6, 10.0, "gm", line_no);
    check_range(r.cpi, 1e-18, 1e-9, "cpi", line_no);
    check_range(r.rbi, 0.0, 1e6, "rbi", line_no);
    check_range(r.rbx_t, 0.0, 1e6, "rbx_t", line_no);
    check_range(r.re_t, 0.0, 1e6, "re_t", line_no);
    if (!rows.empty() && !(r.v_bxex > rows.back().v_bxex)) {
      std::ostringstream os;
      os << "line " << line_no << ": v_bxex must increase monotonically";
      throw SchemaError(os.str());
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw SchemaError("operating-point table has no data rows");
  return rows;
}

std::vector<BjtOpRow> import_op_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open operating-point table " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_op_table(ss.str());
}

std::string format_op_table(const std::vector<BjtOpRow>& rows) {
  std::string out = std::string(kOpTableHeader) + "\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.17e,%.17e,%.17e,%.17e,%.17e,%.17e,%.17e,%.17e,%.17e\n",
                  r.v_bxex, r.i_b, r.i_c, r.gpi, r.gm, r.cpi, r.rbi, r.rbx_t,
                  r.re_t);
    out += buf;
  }
  return out;
}

void export_op_table(const std::filesystem::path& path,
                     const std::vector<BjtOpRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << format_op_table(rows);
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace nlnoise
