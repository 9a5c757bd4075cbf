#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "config.hpp"

namespace nlnoise::cli {

inline constexpr double kRelErrFloor = 1e-12;

using Cell = std::variant<std::monostate, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunOutput {
  Table results;
  /// Additional per-run tables keyed by file name.
  std::vector<std::pair<std::string, Table>> tables;
  /// Additional raw text files keyed by file name.
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> log;
  std::size_t failed_points = 0;
};

/// |measured - theory| / max(|theory|, kRelErrFloor).
[[nodiscard]] double rel_err(double measured, double theory);

/// |H| sign(Re H): the scalar compared against the real closed forms.
[[nodiscard]] double signed_magnitude(std::complex<double> h);

/// Worker count from --jobs, then NLNOISE_JOBS, then 1.
[[nodiscard]] int resolve_jobs(int cli_jobs);

/// Evaluates every sweep point on `jobs` workers; rows keep sweep order.
/// Point failures are recorded in the status column and counted.
[[nodiscard]] RunOutput run_experiment(const ExperimentConfig& cfg, int jobs);

}  // namespace nlnoise::cli
