#pragma once

#include <filesystem>
#include <string>

#include "commands.hpp"
#include "config.hpp"

namespace nlnoise::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// CSV with a header row; numbers in %.12e, empty cells for missing values,
/// strings quoted only when they contain a comma, quote or newline.
[[nodiscard]] std::string format_csv(const Table& table);

/// Resolved config, seed, sweep and build identification; no timestamps, so
/// identical runs produce identical manifests.
[[nodiscard]] Json make_manifest(const ExperimentConfig& cfg, const RunOutput& out);

/// Writes results.csv, any extra tables and files, manifest.json and run.log
/// into `dir`, creating it if needed.
void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                   const RunOutput& out);

}  // namespace nlnoise::cli
