#pragma once

// Experiment configuration: a JSON tree whose leaves may be overridden with
// dotted paths, resolved against per-command defaults and validated before
// any computation starts. docs/config.schema.json documents the layout.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nlnoise/bjt_extract.hpp"
#include "nlnoise/noise_gen.hpp"
#include "nlnoise/ode_sim.hpp"

namespace nlnoise::cli {

using Json = nlohmann::ordered_json;

enum class Command { kAnalyze, kSimulate, kExtract, kPsd };

[[nodiscard]] Command parse_command(std::string_view name);
[[nodiscard]] std::string_view command_name(Command cmd);

struct SweepAxis {
  std::string path;
  std::vector<double> values;
};

struct ExperimentConfig {
  Command command = Command::kAnalyze;
  Json tree;  // resolved: defaults filled in, sweep expanded to values
  std::vector<SweepAxis> sweep;
  std::uint64_t seed = 1;
};

struct SweepPoint {
  std::size_t index = 0;
  std::vector<std::pair<std::string, double>> coords;
  Json tree;
  std::uint64_t seed = 0;
};

/// Reads a JSON config; a manifest written by a previous run is accepted
/// and its "config" member used.
[[nodiscard]] Json load_config_file(const std::filesystem::path& path);

/// Applies "dotted.path=value"; value is parsed as JSON, falling back to a
/// plain string.
void apply_override(Json& tree, std::string_view assignment);

/// Fills defaults, checks every key and value, and validates each sweep
/// point. Throws SchemaError naming the offending field path.
[[nodiscard]] ExperimentConfig resolve(Command cmd, Json tree,
                                       std::optional<std::uint64_t> seed);

/// Cartesian product of the sweep axes, first axis slowest. An empty sweep
/// yields the base configuration as a single point.
[[nodiscard]] std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg);

/// Per-point seed, independent of evaluation order.
[[nodiscard]] std::uint64_t point_seed(std::uint64_t seed, std::size_t index);

// Typed views of a resolved (point) tree.
[[nodiscard]] CircuitSpec circuit_from(const Json& tree);
/// tau converts excitation.rc_omega0 into omega0 (0 when not applicable).
[[nodiscard]] Excitation excitation_from(const Json& tree, double tau);
[[nodiscard]] NoiseModel noise_from(const Json& tree, const Excitation& exc);
[[nodiscard]] SimConfig sim_from(const Json& tree, const SimCircuit& circuit,
                                 const Excitation& exc);
[[nodiscard]] NoiseRunOptions psd_options_from(const Json& tree);
/// Steady-state duration of a psd run, in seconds.
[[nodiscard]] double psd_steady_duration(const Json& tree, const SimConfig& sim,
                                         const NoiseRunOptions& opts,
                                         const Excitation& exc);
[[nodiscard]] std::pair<double, double> psd_band(const Json& tree,
                                                 const Excitation& exc);
[[nodiscard]] SyntheticDevice device_from(const Json& tree);
[[nodiscard]] double validity_threshold(const Json& tree);

}  // namespace nlnoise::cli
