// nlnoise: closed-form analysis, simulation sweeps, spectra and bipolar
// extraction driven by a JSON config. Exit codes: 0 success, 2 config or
// schema error, 3 computation error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "nlnoise/error.hpp"
#include "output.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitCompute = 3;

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string out = "nlnoise_out";
  std::optional<std::uint64_t> seed;
  int jobs = 0;
};

void add_options(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON config file (or a previous manifest.json)");
  sub->add_option("--set", o.sets, "Override a config leaf: dotted.path=value (repeatable)")
      ->allow_extra_args(false);
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", o.seed, "Base seed (overrides the config)");
  sub->add_option("--jobs", o.jobs, "Worker threads (default: NLNOISE_JOBS or 1)")
      ->check(CLI::Range(1, 1024));
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = nlnoise::cli;
  CLI::App app{"Amplitude and phase noise conversion in nonlinear circuits"};
  app.set_version_flag("--version", cli::kToolVersion);
  app.require_subcommand(1);
  Options opts;
  const std::vector<std::pair<const char*, const char*>> subs = {
      {"analyze", "Closed-form H_AM/H_PM, harmonics and validity over a sweep"},
      {"simulate", "Time-domain oracle (two-tone probe or noise run) against theory"},
      {"extract", "Bipolar coefficient extraction and transfer functions"},
      {"psd", "Stochastic noise run with AM/PM spectra"}};
  for (const auto& [name, desc] : subs) add_options(app.add_subcommand(name, desc), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitSchema;
  }

  try {
    const auto cmd = cli::parse_command(app.get_subcommands().front()->get_name());
    cli::Json tree = opts.config.empty() ? cli::Json::object()
                                         : cli::load_config_file(opts.config);
    for (const auto& s : opts.sets) cli::apply_override(tree, s);
    const cli::ExperimentConfig cfg = cli::resolve(cmd, std::move(tree), opts.seed);
    const cli::RunOutput out = cli::run_experiment(cfg, cli::resolve_jobs(opts.jobs));
    cli::write_outputs(opts.out, cfg, out);
    std::cout << "wrote " << out.results.rows.size() << " row(s) to " << opts.out
              << "/results.csv";
    if (out.failed_points > 0) {
      std::cout << "; " << out.failed_points << " point(s) failed, see run.log\n";
      return kExitCompute;
    }
    std::cout << "\n";
    return kExitOk;
  } catch (const nlnoise::SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  } catch (...) {
    std::cerr << "error: unknown failure\n";
    return kExitCompute;
  }
}
