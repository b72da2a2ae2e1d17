/**
 * Command-line front end.  Subcommands: bounds, simulate, detect, sweep, and
 * oracle-check.  Experiment parameters come from a TOML manifest; a few
 * common knobs can be overridden with flags.  Outputs are written atomically
 * into the chosen directory.
 */
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covertslot/experiment.hpp"

namespace {

namespace cli = covertslot::cli;

struct Overrides {
  std::vector<std::int64_t> n_list;
  std::optional<std::int64_t> L;
  std::optional<double> delta;
  std::optional<std::int64_t> trials;
  std::optional<std::int64_t> tv_trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::int64_t> max_codebook;
  bool strict_slot = false;
};

void add_override_flags(CLI::App* cmd, std::string& config_path,
                        Overrides& ov, bool config_required) {
  auto* opt = cmd->add_option("--config", config_path,
                              "TOML experiment manifest");
  if (config_required) opt->required();
  cmd->add_option("--n", ov.n_list, "slot lengths, overrides the manifest");
  cmd->add_option("--L", ov.L, "fixed slot count, overrides the manifest");
  cmd->add_option("--delta", ov.delta, "covertness level");
  cmd->add_option("--trials", ov.trials, "Monte Carlo trials");
  cmd->add_option("--tv-trials", ov.tv_trials,
                  "trials for the total-variation estimate");
  cmd->add_option("--seed", ov.seed, "master seed");
  cmd->add_option("--out", ov.out, "output directory");
  cmd->add_option("--max-codebook", ov.max_codebook,
                  "cap on instantiated codebook rows");
  cmd->add_flag("--strict-slot", ov.strict_slot,
                "require the decoder to name the true slot");
}

cli::ExperimentConfig resolve_config(const std::string& config_path,
                                     const Overrides& ov) {
  cli::ExperimentConfig config = cli::load_config(config_path);
  if (!ov.n_list.empty()) config.n_list = ov.n_list;
  if (ov.L) {
    config.slots.kind = cli::SlotRule::Kind::Fixed;
    config.slots.fixed_count = *ov.L;
  }
  if (ov.delta) config.params.delta = *ov.delta;
  if (ov.trials) config.trials = *ov.trials;
  if (ov.tv_trials) config.tv_trials = *ov.tv_trials;
  if (ov.seed) config.seed = *ov.seed;
  if (ov.out) config.out_dir = *ov.out;
  if (ov.max_codebook) config.max_codebook = *ov.max_codebook;
  if (ov.strict_slot) config.strict_slot = true;
  config.validate();
  return config;
}

std::filesystem::path out_path(const cli::ExperimentConfig& config,
                               const char* name) {
  return std::filesystem::path(config.out_dir) / name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covert communication over slotted channels: bounds, "
               "simulation, and detection experiments"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  bool corrupt_bound = false;

  CLI::App* cmd_bounds =
      app.add_subcommand("bounds", "closed-form report for the n grid");
  add_override_flags(cmd_bounds, config_path, ov, true);

  CLI::App* cmd_simulate = app.add_subcommand(
      "simulate", "error probability and observer gap of the covert scheme");
  add_override_flags(cmd_simulate, config_path, ov, true);

  CLI::App* cmd_detect = app.add_subcommand(
      "detect", "max-slot detector against codebooks above and below the "
                "converse split");
  add_override_flags(cmd_detect, config_path, ov, true);

  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "normalized throughput against the bound lines");
  add_override_flags(cmd_sweep, config_path, ov, true);

  CLI::App* cmd_oracle = app.add_subcommand(
      "oracle-check", "cross-validate estimators against brute-force "
                      "enumeration on small frames");
  std::uint64_t oracle_seed = 7;
  std::string oracle_out;
  cmd_oracle->add_option("--seed", oracle_seed, "master seed");
  cmd_oracle->add_option("--out", oracle_out,
                         "directory for the report file");
  cmd_oracle->add_flag("--corrupt-bound", corrupt_bound,
                       "negative control: falsify one bound and expect "
                       "failure");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_oracle->parsed()) {
      cli::OracleCheckResult result =
          cli::run_oracle_check(oracle_seed, corrupt_bound);
      std::fputs(result.text.c_str(), stdout);
      if (!oracle_out.empty())
        cli::write_file_atomic(
            std::filesystem::path(oracle_out) / "oracle_check.txt",
            result.text);
      return result.all_pass ? 0 : 1;
    }

    cli::ExperimentConfig config = resolve_config(config_path, ov);

    if (cmd_bounds->parsed()) {
      cli::BoundsReport report = cli::run_bounds(config);
      auto path = out_path(config, "bounds.json");
      cli::write_file_atomic(path, report.json);
      std::printf("wrote %s\n", path.string().c_str());
      return 0;
    }

    if (cmd_simulate->parsed()) {
      cli::SimulateResult result = cli::run_simulate(config);
      auto path = out_path(config, "simulate.csv");
      cli::write_file_atomic(path, cli::simulate_csv(result));
      std::printf("wrote %s (%zu rows, status: %s)\n", path.string().c_str(),
                  result.rows.size(), result.status.c_str());
      return result.status == "ok" ? 0 : 1;
    }

    if (cmd_detect->parsed()) {
      cli::DetectResult result = cli::run_detect(config);
      cli::write_file_atomic(out_path(config, "detect_above.csv"),
                             cli::detect_csv(result.above));
      cli::write_file_atomic(out_path(config, "detect_below.csv"),
                             cli::detect_csv(result.below));
      cli::write_file_atomic(out_path(config, "roc_sweep.csv"),
                             cli::roc_csv(result.roc_sweep));
      cli::write_file_atomic(out_path(config, "detect_diagnostics.json"),
                             result.diagnostics_json);
      std::printf("wrote detect_above.csv, detect_below.csv, roc_sweep.csv, "
                  "detect_diagnostics.json in %s (status: %s)\n",
                  config.out_dir.c_str(), result.status.c_str());
      return result.status == "ok" ? 0 : 1;
    }

    if (cmd_sweep->parsed()) {
      cli::SweepResult result = cli::run_sweep(config);
      cli::write_file_atomic(out_path(config, "sweep.csv"),
                             cli::sweep_csv(result));
      if (result.status == "ok")
        cli::write_file_atomic(out_path(config, "sweep.svg"),
                               cli::sweep_svg(result));
      std::printf("wrote sweep.csv%s in %s (status: %s)\n",
                  result.status == "ok" ? " and sweep.svg" : "",
                  config.out_dir.c_str(), result.status.c_str());
      return result.status == "ok" ? 0 : 1;
    }
  } catch (const covertslot::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 2;
  }
  return 0;
}
