#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nlnoise/error.hpp"

namespace nlnoise::cli {

namespace {

using Keys = std::set<std::string>;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw SchemaError(path + ": " + msg);
}

void expect_object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const Json& obj, const Keys& allowed, const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(join(path, key), "unknown key");
  }
}

double number(const Json& obj, const std::string& key, const std::string& path) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) fail(p, "missing value");
  const Json& v = obj.at(key);
  if (!v.is_number()) fail(p, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(p, "must be finite");
  return d;
}

double positive(const Json& obj, const std::string& key, const std::string& path) {
  const double d = number(obj, key, path);
  if (!(d > 0.0)) fail(join(path, key), "must be > 0");
  return d;
}

long long integer(const Json& obj, const std::string& key,
                  const std::string& path, long long lo) {
  const double d = number(obj, key, path);
  if (d != std::floor(d) || d < static_cast<double>(lo) || d > 9.0e15) {
    std::ostringstream os;
    os << "expected an integer >= " << lo;
    fail(join(path, key), os.str());
  }
  return static_cast<long long>(d);
}

std::string text(const Json& obj, const std::string& key, const std::string& path) {
  const std::string p = join(path, key);
  if (!obj.contains(key) || !obj.at(key).is_string()) fail(p, "expected a string");
  return obj.at(key).get<std::string>();
}

bool boolean(const Json& obj, const std::string& key, const std::string& path) {
  const std::string p = join(path, key);
  if (!obj.contains(key) || !obj.at(key).is_boolean()) fail(p, "expected true or false");
  return obj.at(key).get<bool>();
}

void set_default(Json& obj, const std::string& key, Json value) {
  if (!obj.contains(key)) obj[key] = std::move(value);
}

Json& section(Json& tree, const std::string& key) {
  if (!tree.contains(key)) tree[key] = Json::object();
  expect_object(tree[key], key);
  return tree[key];
}

const Json& child(const Json& tree, const std::string& key) {
  if (!tree.contains(key)) fail(key, "missing section");
  return tree.at(key);
}

struct CircuitInfo {
  const char* name;
  std::vector<std::pair<const char*, double>> params;
};

const std::vector<CircuitInfo>& circuit_table() {
  static const std::vector<CircuitInfo> table = {
      {"Memoryless", {{"alpha1", 1.0}, {"alpha2", 0.1}}},
      {"LinCapNonlinG", {{"C0", 100e-15}, {"g2", 10e-3}}},
      {"LinGNonlinCap", {{"g1", 10e-3}, {"C1", 500e-15}}},
      {"RcNonlinG", {{"R", 100.0}, {"C0", 100e-15}, {"g2", 10e-3}}},
      {"RcNonlinC", {{"R", 100.0}, {"C0", 100e-15}, {"C1", 500e-15}}},
      {"RcNonlinGC",
       {{"R", 100.0}, {"C0", 100e-15}, {"g2", 10e-3}, {"C1", 500e-15}}},
  };
  return table;
}

const CircuitInfo& circuit_info(const std::string& type) {
  for (const auto& c : circuit_table()) {
    if (type == c.name) return c;
  }
  std::string names;
  for (const auto& c : circuit_table()) names += std::string(names.empty() ? "" : ", ") + c.name;
  fail("circuit.type", "unknown circuit '" + type + "' (expected one of " + names + ")");
}

bool is_rc_type(const std::string& type) {
  return type == "RcNonlinG" || type == "RcNonlinC" || type == "RcNonlinGC";
}

void resolve_circuit(Json& tree) {
  Json& c = section(tree, "circuit");
  set_default(c, "type", "RcNonlinG");
  const CircuitInfo& info = circuit_info(text(c, "type", "circuit"));
  Keys allowed{"type"};
  for (const auto& [k, v] : info.params) {
    allowed.insert(k);
    set_default(c, k, v);
  }
  check_keys(c, allowed, "circuit");
  for (const auto& [k, v] : info.params) (void)number(c, k, "circuit");
}

void resolve_excitation(Json& tree, bool rc_default, double amplitude) {
  Json& e = section(tree, "excitation");
  check_keys(e, {"amplitude", "omega0", "frequency", "rc_omega0"}, "excitation");
  set_default(e, "amplitude", amplitude);
  const int n_freq = static_cast<int>(e.contains("omega0")) +
                     static_cast<int>(e.contains("frequency")) +
                     static_cast<int>(e.contains("rc_omega0"));
  if (n_freq > 1) {
    fail("excitation", "give only one of omega0, frequency, rc_omega0");
  }
  if (n_freq == 0) {
    if (rc_default) {
      e["rc_omega0"] = 1.0;
    } else {
      e["frequency"] = 1e9;
    }
  }
  (void)positive(e, "amplitude", "excitation");
  for (const char* k : {"omega0", "frequency", "rc_omega0"}) {
    if (e.contains(k)) (void)positive(e, k, "excitation");
  }
}

void resolve_noise(Json& tree, bool stochastic_default) {
  Json& n = section(tree, "noise");
  set_default(n, "type", stochastic_default ? "white" : "probe");
  const std::string type = text(n, "type", "noise");
  if (type == "probe") {
    check_keys(n, {"type", "amplitude", "amplitude_ratio", "omega_m", "omega_m_ratio"},
               "noise");
    if (n.contains("amplitude") && n.contains("amplitude_ratio")) {
      fail("noise", "give only one of amplitude, amplitude_ratio");
    }
    if (n.contains("omega_m") && n.contains("omega_m_ratio")) {
      fail("noise", "give only one of omega_m, omega_m_ratio");
    }
    if (!n.contains("amplitude")) set_default(n, "amplitude_ratio", 0.002);
    if (!n.contains("omega_m")) set_default(n, "omega_m_ratio", 0.01);
    for (const char* k : {"amplitude", "amplitude_ratio", "omega_m", "omega_m_ratio"}) {
      if (n.contains(k)) (void)positive(n, k, "noise");
    }
  } else if (type == "white") {
    check_keys(n, {"type", "psd_level"}, "noise");
    set_default(n, "psd_level", 1e-14);
    (void)positive(n, "psd_level", "noise");
  } else if (type == "flicker") {
    check_keys(n, {"type", "psd_at_1hz", "f_low", "f_high", "f_low_ratio", "f_high_ratio"},
               "noise");
    set_default(n, "psd_at_1hz", 1e-6);
    if (n.contains("f_low") != n.contains("f_high")) {
      fail("noise", "give both f_low and f_high");
    }
    if (n.contains("f_low") && (n.contains("f_low_ratio") || n.contains("f_high_ratio"))) {
      fail("noise", "give either absolute or relative band edges");
    }
    if (!n.contains("f_low")) {
      set_default(n, "f_low_ratio", 5e-5);
      set_default(n, "f_high_ratio", 0.1);
    }
    for (const char* k : {"psd_at_1hz", "f_low", "f_high", "f_low_ratio", "f_high_ratio"}) {
      if (n.contains(k)) (void)positive(n, k, "noise");
    }
  } else {
    fail("noise.type", "unknown noise '" + type + "' (expected probe, white or flicker)");
  }
}

void resolve_sim(Json& tree, double samples_per_period) {
  Json& s = section(tree, "sim");
  check_keys(s, {"samples_per_period", "steady_periods", "transient_skip", "integrator",
                 "max_step_nonlin_iter", "tol"},
             "sim");
  set_default(s, "samples_per_period", samples_per_period);
  set_default(s, "steady_periods", 200);
  set_default(s, "transient_skip", "auto");
  set_default(s, "integrator", "trapezoidal");
  set_default(s, "max_step_nonlin_iter", 50);
  set_default(s, "tol", 1e-13);
  (void)integer(s, "samples_per_period", "sim", 50);
  (void)positive(s, "steady_periods", "sim");
  if (!(s["transient_skip"].is_string() && s["transient_skip"] == "auto")) {
    (void)positive(s, "transient_skip", "sim");
  }
  const std::string integ = text(s, "integrator", "sim");
  if (integ != "trapezoidal" && integ != "rk4") {
    fail("sim.integrator", "expected 'trapezoidal' or 'rk4'");
  }
  (void)integer(s, "max_step_nonlin_iter", "sim", 1);
  (void)positive(s, "tol", "sim");
}

void resolve_psd(Json& tree) {
  Json& p = section(tree, "psd");
  check_keys(p, {"lp_cutoff_ratio", "decimate", "min_segments", "decimated_samples",
                 "trim_fraction", "band_ratio"},
             "psd");
  set_default(p, "lp_cutoff_ratio", 0.05);
  set_default(p, "decimate", 32);
  set_default(p, "min_segments", 64);
  set_default(p, "decimated_samples", 262144);
  set_default(p, "trim_fraction", 0.05);
  set_default(p, "band_ratio", Json::array({2e-3, 2.5e-2}));
  const double lp = positive(p, "lp_cutoff_ratio", "psd");
  if (!(lp < 0.5)) fail("psd.lp_cutoff_ratio", "must be below 0.5");
  (void)integer(p, "decimate", "psd", 1);
  (void)integer(p, "min_segments", "psd", 2);
  (void)integer(p, "decimated_samples", "psd", 256);
  const double trim = number(p, "trim_fraction", "psd");
  if (!(trim >= 0.0 && trim < 0.4)) fail("psd.trim_fraction", "must lie in [0, 0.4)");
  const Json& band = p["band_ratio"];
  if (!band.is_array() || band.size() != 2 || !band[0].is_number() ||
      !band[1].is_number() || !(band[0].get<double>() > 0.0) ||
      !(band[1].get<double>() > band[0].get<double>())) {
    fail("psd.band_ratio", "expected [lo, hi] with 0 < lo < hi");
  }
}

void resolve_device(Json& tree) {
  Json& d = section(tree, "device");
  set_default(d, "source", "synthetic");
  const std::string src = text(d, "source", "device");
  if (src == "csv") {
    check_keys(d, {"source", "path"}, "device");
    const std::string path = text(d, "path", "device");
    if (!std::filesystem::exists(path)) fail("device.path", "file not found: " + path);
    return;
  }
  if (src != "synthetic") fail("device.source", "expected 'synthetic' or 'csv'");
  const SyntheticDevice def;
  const std::vector<std::pair<const char*, double>> params = {
      {"i_s", def.i_s},     {"beta", def.beta}, {"v_t", def.v_t},
      {"c_je0", def.c_je0}, {"v_j", def.v_j},   {"m_j", def.m_j},
      {"tau_f", def.tau_f}, {"r_b", def.r_b},   {"r_e", def.r_e}};
  Keys allowed{"source"};
  for (const auto& [k, v] : params) {
    allowed.insert(k);
    set_default(d, k, v);
  }
  check_keys(d, allowed, "device");
  for (const auto& [k, v] : params) (void)number(d, k, "device");
}

void resolve_extract(Json& tree) {
  Json& x = section(tree, "extract");
  check_keys(x, {"bias_ic", "v_start", "v_stop", "points", "de_embed", "verify",
                 "probe_ratio"},
             "extract");
  set_default(x, "bias_ic", 1e-3);
  set_default(x, "v_start", 0.80);
  set_default(x, "v_stop", 0.94);
  set_default(x, "points", 141);
  set_default(x, "de_embed", true);
  set_default(x, "verify", false);
  set_default(x, "probe_ratio", 0.005);
  (void)positive(x, "bias_ic", "extract");
  const double lo = number(x, "v_start", "extract");
  const double hi = number(x, "v_stop", "extract");
  if (!(hi > lo)) fail("extract.v_stop", "must exceed v_start");
  (void)integer(x, "points", "extract", 5);
  (void)boolean(x, "de_embed", "extract");
  (void)boolean(x, "verify", "extract");
  const double pr = positive(x, "probe_ratio", "extract");
  if (pr > 0.01) fail("extract.probe_ratio", "must be <= 0.01");
}

std::vector<double> spaced(const Json& spec, bool log, const std::string& path) {
  if (!spec.is_array() || spec.size() != 3 || !spec[0].is_number() ||
      !spec[1].is_number() || !spec[2].is_number()) {
    fail(path, "expected [start, stop, num]");
  }
  const double a = spec[0].get<double>();
  const double b = spec[1].get<double>();
  const double nd = spec[2].get<double>();
  if (!std::isfinite(a) || !std::isfinite(b) || nd < 1 || nd != std::floor(nd) || nd > 1e6) {
    fail(path, "expected finite start/stop and an integer num >= 1");
  }
  if (log && !(a > 0.0 && b > 0.0)) fail(path, "logspace needs positive bounds");
  const auto n = static_cast<std::size_t>(nd);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    v[i] = log ? std::exp(std::log(a) + f * (std::log(b) - std::log(a)))
               : a + f * (b - a);
  }
  if (n > 1) {
    v.back() = b;
  }
  return v;
}

const Json* find_path(const Json& tree, const std::string& path) {
  const Json* cur = &tree;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty() || !cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &cur->at(key);
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

void set_path(Json& tree, const std::string& path, Json value) {
  Json* cur = &tree;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw SchemaError(path + ": empty path component");
    if (dot == std::string::npos) {
      if (!cur->is_object()) throw SchemaError(path + ": parent is not an object");
      (*cur)[key] = std::move(value);
      return;
    }
    if (!cur->is_object()) throw SchemaError(path + ": parent is not an object");
    if (!cur->contains(key)) (*cur)[key] = Json::object();
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

std::vector<SweepAxis> resolve_sweep(Json& tree) {
  std::vector<SweepAxis> axes;
  if (!tree.contains("sweep")) {
    tree["sweep"] = Json::array();
    return axes;
  }
  Json& sw = tree["sweep"];
  if (!sw.is_array()) fail("sweep", "expected a list of axes");
  Json normalized = Json::array();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < sw.size(); ++i) {
    const std::string p = "sweep[" + std::to_string(i) + "]";
    const Json& ax = sw[i];
    expect_object(ax, p);
    check_keys(ax, {"path", "values", "logspace", "linspace"}, p);
    SweepAxis axis;
    axis.path = text(ax, "path", p);
    const int n_forms = static_cast<int>(ax.contains("values")) +
                        static_cast<int>(ax.contains("logspace")) +
                        static_cast<int>(ax.contains("linspace"));
    if (n_forms != 1) fail(p, "give exactly one of values, logspace, linspace");
    if (ax.contains("values")) {
      const Json& vals = ax["values"];
      if (!vals.is_array() || vals.empty()) fail(p + ".values", "expected a non-empty list");
      for (const auto& v : vals) {
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
          fail(p + ".values", "values must be finite numbers");
        }
        axis.values.push_back(v.get<double>());
      }
    } else if (ax.contains("logspace")) {
      axis.values = spaced(ax["logspace"], true, p + ".logspace");
    } else {
      axis.values = spaced(ax["linspace"], false, p + ".linspace");
    }
    const Json* target = find_path(tree, axis.path);
    if (target == nullptr) fail(p + ".path", "'" + axis.path + "' does not name a config value");
    if (!target->is_number()) fail(p + ".path", "'" + axis.path + "' is not numeric");
    if (!seen.insert(axis.path).second) fail(p + ".path", "duplicate sweep axis");
    normalized.push_back(Json{{"path", axis.path}, {"values", axis.values}});
    axes.push_back(std::move(axis));
  }
  sw = std::move(normalized);
  return axes;
}

void validate_point(Command cmd, const Json& tree, std::size_t index) {
  try {
    if (cmd == Command::kExtract) {
      const Json& d = child(tree, "device");
      if (d.at("source") == "synthetic") device_from(tree).validate();
      (void)excitation_from(tree, 1.0);
      return;
    }
    const CircuitSpec spec = circuit_from(tree);
    validate(spec);
    const SimCircuit circuit = spec;
    const Excitation exc = excitation_from(tree, time_constant(circuit));
    if (cmd == Command::kAnalyze) return;
    const NoiseModel noise = noise_from(tree, exc);
    const SimConfig sim = sim_from(tree, circuit, exc);
    validate(sim, circuit, exc);
    if (cmd == Command::kPsd) {
      if (std::holds_alternative<SingleToneProbe>(noise)) {
        fail("noise.type", "psd needs a white or flicker noise model");
      }
      (void)psd_options_from(tree);
      (void)psd_band(tree, exc);
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const InvalidArgument& e) {
    std::ostringstream os;
    os << "sweep point " << index << ": " << e.what();
    throw SchemaError(os.str());
  }
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "analyze") return Command::kAnalyze;
  if (name == "simulate") return Command::kSimulate;
  if (name == "extract") return Command::kExtract;
  if (name == "psd") return Command::kPsd;
  throw SchemaError("unknown command '" + std::string(name) + "'");
}

std::string_view command_name(Command cmd) {
  switch (cmd) {
    case Command::kAnalyze: return "analyze";
    case Command::kSimulate: return "simulate";
    case Command::kExtract: return "extract";
    case Command::kPsd: return "psd";
  }
  return "unknown";
}

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string() + ": cannot open config file");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw SchemaError(path.string() + ": top level must be an object");
  if (j.contains("manifest_version") && j.contains("config")) return j["config"];
  return j;
}

void apply_override(Json& tree, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw SchemaError("--set expects dotted.path=value, got '" + std::string(assignment) + "'");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  set_path(tree, path, std::move(value));
}

ExperimentConfig resolve(Command cmd, Json tree, std::optional<std::uint64_t> seed) {
  if (tree.is_null()) tree = Json::object();
  expect_object(tree, "config");
  Keys allowed{"seed", "sweep", "validity_threshold", "excitation"};
  switch (cmd) {
    case Command::kAnalyze:
      allowed.insert("circuit");
      break;
    case Command::kSimulate:
      allowed.insert({"circuit", "noise", "sim"});
      break;
    case Command::kPsd:
      allowed.insert({"circuit", "noise", "sim", "psd"});
      break;
    case Command::kExtract:
      allowed.insert({"device", "extract", "sim"});
      break;
  }
  check_keys(tree, allowed, "");

  ExperimentConfig cfg;
  cfg.command = cmd;
  if (seed) {
    tree["seed"] = *seed;
  } else if (!tree.contains("seed")) {
    tree["seed"] = 1;
  }
  if (!tree["seed"].is_number_unsigned() && !(tree["seed"].is_number_integer() &&
                                              tree["seed"].get<long long>() >= 0)) {
    fail("seed", "expected a non-negative integer");
  }
  cfg.seed = tree["seed"].get<std::uint64_t>();
  set_default(tree, "validity_threshold", 0.1);
  (void)positive(tree, "validity_threshold", "");

  if (cmd == Command::kExtract) {
    resolve_device(tree);
    resolve_extract(tree);
    resolve_excitation(tree, true, 0.01);
    resolve_sim(tree, 128);
  } else {
    resolve_circuit(tree);
    resolve_excitation(tree, is_rc_type(tree["circuit"]["type"].get<std::string>()), 0.05);
    if (cmd != Command::kAnalyze) {
      resolve_noise(tree, cmd == Command::kPsd);
      resolve_sim(tree, cmd == Command::kPsd ? 64 : 128);
    }
    if (cmd == Command::kPsd) resolve_psd(tree);
  }
  cfg.sweep = resolve_sweep(tree);
  cfg.tree = std::move(tree);

  for (const auto& p : expand_sweep(cfg)) validate_point(cmd, p.tree, p.index);
  return cfg;
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
  return mix64(seed ^ mix64(0xA0761D6478BD642FULL * (static_cast<std::uint64_t>(index) + 1)));
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg) {
  std::size_t total = 1;
  for (const auto& ax : cfg.sweep) total *= ax.values.size();
  std::vector<SweepPoint> pts;
  pts.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    SweepPoint p;
    p.index = i;
    p.tree = cfg.tree;
    std::size_t rem = i;
    std::vector<std::size_t> idx(cfg.sweep.size());
    for (std::size_t a = cfg.sweep.size(); a-- > 0;) {
      idx[a] = rem % cfg.sweep[a].values.size();
      rem /= cfg.sweep[a].values.size();
    }
    for (std::size_t a = 0; a < cfg.sweep.size(); ++a) {
      const double v = cfg.sweep[a].values[idx[a]];
      set_path(p.tree, cfg.sweep[a].path, v);
      p.coords.emplace_back(cfg.sweep[a].path, v);
    }
    p.seed = point_seed(cfg.seed, i);
    pts.push_back(std::move(p));
  }
  return pts;
}

CircuitSpec circuit_from(const Json& tree) {
  const Json& c = child(tree, "circuit");
  const std::string type = text(c, "type", "circuit");
  auto n = [&](const char* k) { return number(c, k, "circuit"); };
  if (type == "Memoryless") return Memoryless{n("alpha1"), n("alpha2")};
  if (type == "LinCapNonlinG") return LinCapNonlinG{n("C0"), n("g2")};
  if (type == "LinGNonlinCap") return LinGNonlinCap{n("g1"), n("C1")};
  if (type == "RcNonlinG") return RcNonlinG{n("R"), n("C0"), n("g2")};
  if (type == "RcNonlinC") return RcNonlinC{n("R"), n("C0"), n("C1")};
  if (type == "RcNonlinGC") return RcNonlinGC{n("R"), n("C0"), n("g2"), n("C1")};
  (void)circuit_info(type);
  fail("circuit.type", "unsupported");
}

Excitation excitation_from(const Json& tree, double tau) {
  const Json& e = child(tree, "excitation");
  Excitation exc;
  exc.amplitude = positive(e, "amplitude", "excitation");
  if (e.contains("omega0")) {
    exc.omega0 = positive(e, "omega0", "excitation");
  } else if (e.contains("frequency")) {
    exc.omega0 = kTwoPi * positive(e, "frequency", "excitation");
  } else {
    const double x = positive(e, "rc_omega0", "excitation");
    if (!(tau > 0.0)) {
      fail("excitation.rc_omega0", "the circuit has no RC time constant; use omega0 or frequency");
    }
    exc.omega0 = x / tau;
  }
  return exc;
}

NoiseModel noise_from(const Json& tree, const Excitation& exc) {
  const Json& n = child(tree, "noise");
  const std::string type = text(n, "type", "noise");
  const double f0 = exc.frequency();
  if (type == "probe") {
    SingleToneProbe p;
    p.amplitude = n.contains("amplitude") ? positive(n, "amplitude", "noise")
                                          : positive(n, "amplitude_ratio", "noise") * exc.amplitude;
    p.omega_m = n.contains("omega_m") ? positive(n, "omega_m", "noise")
                                      : positive(n, "omega_m_ratio", "noise") * exc.omega0;
    return p;
  }
  if (type == "white") return White{positive(n, "psd_level", "noise")};
  Flicker f;
  f.psd_at_1hz = positive(n, "psd_at_1hz", "noise");
  if (n.contains("f_low")) {
    f.f_low = positive(n, "f_low", "noise");
    f.f_high = positive(n, "f_high", "noise");
  } else {
    f.f_low = positive(n, "f_low_ratio", "noise") * f0;
    f.f_high = positive(n, "f_high_ratio", "noise") * f0;
  }
  if (!(f.f_high > f.f_low)) fail("noise.f_high", "must exceed f_low");
  return f;
}

SimConfig sim_from(const Json& tree, const SimCircuit& circuit, const Excitation& exc) {
  const Json& s = child(tree, "sim");
  SimConfig cfg = default_sim_config(circuit, exc);
  const double period = kTwoPi / exc.omega0;
  cfg.sample_rate = static_cast<double>(integer(s, "samples_per_period", "sim", 50)) *
                    exc.frequency();
  if (!s.at("transient_skip").is_string()) {
    cfg.transient_skip = positive(s, "transient_skip", "sim");
  }
  cfg.duration = cfg.transient_skip + positive(s, "steady_periods", "sim") * period;
  cfg.integrator = text(s, "integrator", "sim") == "rk4" ? Integrator::kRk4
                                                         : Integrator::kTrapezoidal;
  cfg.max_step_nonlin_iter = static_cast<int>(integer(s, "max_step_nonlin_iter", "sim", 1));
  cfg.tol = positive(s, "tol", "sim");
  return cfg;
}

NoiseRunOptions psd_options_from(const Json& tree) {
  const Json& p = child(tree, "psd");
  NoiseRunOptions o;
  o.decimate = static_cast<std::size_t>(integer(p, "decimate", "psd", 1));
  o.min_segments = static_cast<std::size_t>(integer(p, "min_segments", "psd", 2));
  o.trim_fraction = number(p, "trim_fraction", "psd");
  return o;
}

double psd_steady_duration(const Json& tree, const SimConfig& sim,
                           const NoiseRunOptions& opts, const Excitation& /*exc*/) {
  const Json& p = child(tree, "psd");
  const auto n_dec = integer(p, "decimated_samples", "psd", 256);
  return static_cast<double>(n_dec) * static_cast<double>(opts.decimate) / sim.sample_rate;
}

std::pair<double, double> psd_band(const Json& tree, const Excitation& exc) {
  const Json& band = child(tree, "psd").at("band_ratio");
  const double f0 = exc.frequency();
  return {band[0].get<double>() * f0, band[1].get<double>() * f0};
}

SyntheticDevice device_from(const Json& tree) {
  const Json& d = child(tree, "device");
  auto n = [&](const char* k) { return number(d, k, "device"); };
  SyntheticDevice dev;
  dev.i_s = n("i_s");
  dev.beta = n("beta");
  dev.v_t = n("v_t");
  dev.c_je0 = n("c_je0");
  dev.v_j = n("v_j");
  dev.m_j = n("m_j");
  dev.tau_f = n("tau_f");
  dev.r_b = n("r_b");
  dev.r_e = n("r_e");
  return dev;
}

double validity_threshold(const Json& tree) {
  return positive(tree, "validity_threshold", "");
}

}  // namespace nlnoise::cli
