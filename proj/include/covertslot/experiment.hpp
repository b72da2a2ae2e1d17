/**
 * Experiment manifests and the runners behind the command-line subcommands:
 * closed-form reports, end-to-end reliability and covertness simulation,
 * detection operating points, throughput sweeps against the bound lines, and
 * the self-check suite that cross-validates the estimators against the
 * brute-force oracle.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "covertslot/bounds.hpp"
#include "covertslot/distributions.hpp"

namespace covertslot::cli {

enum class ChannelFamily { Dmc, Awgn };

struct SlotRule {
  enum class Kind { Fixed, Polynomial };
  Kind kind = Kind::Fixed;
  std::int64_t fixed_count = 100;
  double kappa = 1.0;

  /** Fixed count, or max(2, round(n^kappa)) for the polynomial rule. */
  std::int64_t slots_for(std::int64_t n) const;
};

struct ExperimentConfig {
  ChannelFamily family = ChannelFamily::Dmc;
  std::optional<DmcPair> dmc;
  std::optional<AwgnPair> awgn;
  std::vector<std::int64_t> n_list;
  SlotRule slots;
  bounds::AchievabilityParams params;
  std::int64_t trials = 1000;
  std::int64_t tv_trials = 0;  // 0 falls back to trials
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  std::int64_t max_codebook = 1024;
  bool strict_slot = false;

  void validate() const;
};

ExperimentConfig parse_config(std::string_view toml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct BoundsReport {
  std::string json;
};

BoundsReport run_bounds(const ExperimentConfig& config);

struct SimulateRow {
  std::int64_t n = 0;
  std::int64_t L = 0;
  double log_m = 0.0;
  double p_e_hat = 0.0;
  double p_e_se = 0.0;
  double tv_hat = 0.0;
  double tv_se = 0.0;
  double runtime_s = 0.0;
};

struct SimulateResult {
  std::vector<SimulateRow> rows;
  std::string status = "ok";
};

/**
 * For each n: picks the covert signal level, sizes the codebook (capped at
 * max_codebook rows for instantiation; log_m always reports the full size),
 * estimates the message error probability on the receiver channel, and
 * estimates the observer's total-variation gap.
 */
SimulateResult run_simulate(const ExperimentConfig& config);
std::string simulate_csv(const SimulateResult& result,
                         bool include_runtime = true);

struct DetectRow {
  std::int64_t n = 0;
  std::int64_t L = 0;
  double tau = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double sum = 0.0;
};

struct RocSweepRow {
  double tau = 0.0;
  double alpha_hat = 0.0;
  double alpha_se = 0.0;
  double beta_hat = 0.0;
  double beta_se = 0.0;
};

struct DetectResult {
  std::vector<DetectRow> above;
  std::vector<DetectRow> below;
  std::vector<RocSweepRow> roc_sweep;
  std::string diagnostics_json;
  std::string status = "ok";
};

/**
 * Runs the level-tau max-slot detector against codebooks placed above the
 * converse weight split (1.5x) and against covert codebooks below it, plus a
 * threshold sweep at the largest n.
 */
DetectResult run_detect(const ExperimentConfig& config);
std::string detect_csv(const std::vector<DetectRow>& rows);
std::string roc_csv(const std::vector<RocSweepRow>& rows);

struct SweepRow {
  std::int64_t n = 0;
  std::int64_t L = 0;
  double log_m = 0.0;
  double normalized = 0.0;
  double p_e_hat = 0.0;
  double p_e_se = 0.0;
  double tv_hat = 0.0;
  double tv_se = 0.0;
  bool feasible = false;
  bool reliable = false;
  bool covert = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double lower = 0.0;
  double upper = 0.0;
  double target = 0.0;
  std::string status = "ok";
};

/**
 * Normalized throughput log_m / sqrt(n log L) across the n grid, with the
 * capacity bound lines and the slack-adjusted target; rows record whether
 * the operating point was reliable (error below 0.05) and covert (tv within
 * delta plus three standard errors).
 */
SweepResult run_sweep(const ExperimentConfig& config);
std::string sweep_csv(const SweepResult& result);
std::string sweep_svg(const SweepResult& result);

struct OracleCheckItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct OracleCheckResult {
  std::vector<OracleCheckItem> items;
  bool all_pass = false;
  std::string text;
};

/**
 * Cross-validates closed forms and estimators against brute-force
 * enumeration on small frames.  corrupt_bound deliberately halves one bound
 * as a negative control; the run must then fail.
 */
OracleCheckResult run_oracle_check(std::uint64_t seed, bool corrupt_bound);

/** Writes via a temp file in the same directory, then renames into place. */
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace covertslot::cli
