/**
 * Acceptance gate for the toolkit.  Runs ten end-to-end checks spanning the
 * closed-form bounds, the brute-force oracle, the Monte Carlo estimators, the
 * desk-scale link and detection experiments, and full-rerun determinism.
 * Prints one [PASS]/[FAIL] line per check with its runtime and exits nonzero
 * if any check fails.  CSV artifacts land under the output directory, one
 * tree per run, so failures can be inspected offline.
 */
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "covertslot/bounds.hpp"
#include "covertslot/codec.hpp"
#include "covertslot/csv.hpp"
#include "covertslot/detection.hpp"
#include "covertslot/distributions.hpp"
#include "covertslot/errors.hpp"
#include "covertslot/exact.hpp"
#include "covertslot/experiment.hpp"
#include "covertslot/rng.hpp"

namespace fs = std::filesystem;
using namespace covertslot;

namespace {

struct CheckResult {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::string name;
  double limit_s = 0.0;
  std::function<CheckResult(std::uint64_t, const fs::path&)> body;
};

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

/** Random full-support binary observer pair with chi-squared at least 0.01. */
DmcPair random_observer(rng::Stream& stream) {
  for (;;) {
    double u = 0.1 + 0.8 * stream.uniform();
    double v = 0.1 + 0.8 * stream.uniform();
    FiniteDistribution q0({u, 1.0 - u});
    FiniteDistribution q1({v, 1.0 - v});
    if (chi_squared(q1, q0) < 0.01) continue;
    return DmcPair(q0, q1, q0, q1);
  }
}

CheckResult check_mixture_dominance(std::uint64_t seed, const fs::path& dir) {
  rng::Stream stream(rng::derive(seed, rng::Role::Scratch, 201));
  csv::Writer w({"channel", "q0_head", "q1_head", "n", "L", "alpha",
                 "exact_kl", "linear_form", "exp_form"});
  int cases = 0, violations = 0;
  double worst = -1e300;
  for (int c = 0; c < 20; ++c) {
    DmcPair pair = random_observer(stream);
    double chi2 = chi_squared(pair.q1, pair.q0);
    for (std::size_t n = 1; n <= 3; ++n) {
      for (std::size_t L = 1; L <= 3; ++L) {
        for (int a = 1; a <= 9; ++a) {
          double alpha = 0.1 * a;
          exact::ExactInstance instance(n, L, pair, alpha);
          double kl = exact::exact_kl(exact::exact_mixture_law(instance),
                                      exact::product_law(pair.q0, n * L));
          auto bound = bounds::dmc_slot_kl_bound(
              static_cast<std::int64_t>(n), static_cast<std::int64_t>(L),
              alpha, chi2);
          ++cases;
          if (!(kl <= bound.exact_form + 1e-9 && kl <= bound.exp_form + 1e-9))
            ++violations;
          worst = std::max(worst, kl - bound.exact_form);
          w.row(static_cast<std::int64_t>(c), pair.q0[0], pair.q1[0],
                static_cast<std::int64_t>(n), static_cast<std::int64_t>(L),
                alpha, kl, bound.exact_form, bound.exp_form);
        }
      }
    }
  }
  cli::write_file_atomic(dir / "c1_mixture_grid.csv", w.str());
  return {violations == 0,
          std::to_string(cases) + " cases, " + std::to_string(violations) +
              " violations, worst kl minus bound " + fmt("%.3g", worst)};
}

CheckResult check_gaussian_dominance(std::uint64_t seed, const fs::path& dir) {
  const std::pair<std::size_t, std::size_t> shapes[] = {{1, 2}, {2, 2}, {3, 4}};
  const double ratios[] = {0.25, 0.5, 1.0};
  csv::Writer w({"n", "L", "rho", "estimate", "std_error", "bound"});
  int violations = 0;
  double worst = -1e300;
  std::uint64_t cell = 0;
  for (auto [n, L] : shapes) {
    for (double rho : ratios) {
      auto mc = exact::mc_kl_awgn(n, L, rho, 1.0, 1000000,
                                  rng::derive(seed, rng::Role::Scratch, 202,
                                              cell));
      auto bound = bounds::awgn_slot_kl_bound(static_cast<std::int64_t>(n),
                                              static_cast<std::int64_t>(L),
                                              rho, 1.0);
      double slack = mc.estimate - bound.exact_form - 3.0 * mc.std_error;
      if (slack > 0.0) ++violations;
      worst = std::max(worst, slack);
      w.row(static_cast<std::int64_t>(n), static_cast<std::int64_t>(L), rho,
            mc.estimate, mc.std_error, bound.exact_form);
      ++cell;
    }
  }
  cli::write_file_atomic(dir / "c2_gaussian_mc.csv", w.str());
  return {violations == 0,
          "9 cells at 1e6 samples, " + std::to_string(violations) +
              " above bound plus 3 std errors, worst slack " +
              fmt("%.3g", worst)};
}

CheckResult check_round_trip(std::uint64_t seed, const fs::path& dir) {
  rng::Stream stream(rng::derive(seed, rng::Role::Scratch, 203));
  csv::Writer w({"family", "n", "L", "delta", "level", "budget", "exp_form"});
  int done = 0, violations = 0;
  double worst = 0.0;
  while (done < 50) {
    bool gaussian = done >= 25;
    std::int64_t n = 100 + static_cast<std::int64_t>(stream.uniform_int(19901));
    std::int64_t L = 2 + static_cast<std::int64_t>(stream.uniform_int(1999));
    double delta = 0.15 + 0.75 * stream.uniform();
    double scale = gaussian ? 0.3 + 3.0 * stream.uniform()
                            : 0.5 + 8.0 * stream.uniform();
    double level = 0.0;
    try {
      level = gaussian ? bounds::choose_rho_n(n, L, delta, scale)
                       : bounds::choose_alpha_n(n, L, delta, scale);
    } catch (const CovertnessInfeasible&) {
      continue;
    }
    if (!(level > 0.0)) continue;
    double budget = bounds::covertness_budget(n, delta);
    auto bound = gaussian ? bounds::awgn_slot_kl_bound(n, L, level, scale)
                          : bounds::dmc_slot_kl_bound(n, L, level, scale);
    double gap = std::abs(bound.exp_form - budget);
    if (!(gap <= 1e-10)) ++violations;
    worst = std::max(worst, gap);
    w.row(std::string(gaussian ? "awgn" : "dmc"), n, L, delta, level, budget,
          bound.exp_form);
    ++done;
  }
  cli::write_file_atomic(dir / "c3_round_trip.csv", w.str());
  return {violations == 0,
          "50 feasible triples, worst budget gap " + fmt("%.3g", worst)};
}

CheckResult check_capacity_ratio(std::uint64_t seed, const fs::path& dir) {
  rng::Stream stream(rng::derive(seed, rng::Role::Scratch, 204));
  csv::Writer w({"family", "lower", "upper", "ratio_error"});
  const double root2 = std::sqrt(2.0);
  int violations = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    bounds::CapacityBounds cap;
    std::string family;
    if (k < 50) {
      family = "dmc";
      double fr = 0.01 + 0.19 * stream.uniform();
      double fo = std::min(0.45, fr + 0.03 + 0.2 * stream.uniform());
      cap = bounds::dmc_capacity_bounds(DmcPair::bsc(fr, fo));
    } else {
      family = "awgn";
      double sigma_b2 = 0.05 + 1.95 * stream.uniform();
      cap = bounds::awgn_capacity_bounds(
          AwgnPair(sigma_b2, sigma_b2 * (1.05 + 3.0 * stream.uniform())));
    }
    double err = std::abs(cap.upper / cap.lower - root2);
    if (!(err <= 1e-12)) ++violations;
    worst = std::max(worst, err);
    w.row(family, cap.lower, cap.upper, err);
  }
  cli::write_file_atomic(dir / "c4_capacity_ratio.csv", w.str());
  return {violations == 0,
          "100 channel pairs, worst ratio error " + fmt("%.3g", worst)};
}

struct FloorInstance {
  DmcPair pair;
  codec::Codebook codebook;
  std::vector<double> induced;
  std::vector<double> idle;
  double exact_tv = 0.0;
};

FloorInstance make_floor_instance(std::uint64_t seed, std::uint64_t index,
                                  rng::Stream& stream) {
  DmcPair pair = random_observer(stream);
  std::size_t m = std::size_t{1} << (1 + stream.uniform_int(4));
  double bias = 0.15 + 0.7 * stream.uniform();
  codec::Codebook cb = codec::generate_codebook(
      codec::CodebookKind::DmcBernoulli, m, 2, bias,
      rng::derive(seed, rng::Role::Scratch, 206, index));
  exact::ExactInstance frame(2, 2, pair, bias, cb);
  std::vector<double> induced = exact::exact_induced_law(frame);
  std::vector<double> idle = exact::product_law(pair.q0, 4);
  double tv = exact::exact_tv(induced, idle);
  return {pair, cb, std::move(induced), std::move(idle), tv};
}

CheckResult check_error_floor(std::uint64_t seed, const fs::path& dir) {
  csv::Writer w({"instance", "codebook_size", "test", "false_alarm",
                 "missed_detection", "sum", "floor"});
  int cases = 0, violations = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    rng::Stream stream(rng::derive(seed, rng::Role::Scratch, 205, i));
    FloorInstance inst = make_floor_instance(seed, i, stream);
    double floor = 1.0 - inst.exact_tv;
    for (int t = 0; t < 20; ++t) {
      double alarm = 0.0, miss = 1.0;
      for (std::size_t z = 0; z < inst.idle.size(); ++z) {
        if (stream.uniform() < 0.5) {
          alarm += inst.idle[z];
          miss -= inst.induced[z];
        }
      }
      ++cases;
      if (!(alarm + miss >= floor - 1e-9)) ++violations;
      worst = std::max(worst, floor - (alarm + miss));
      w.row(static_cast<std::int64_t>(i),
            static_cast<std::int64_t>(inst.codebook.size()),
            static_cast<std::int64_t>(t), alarm, miss, alarm + miss, floor);
    }
  }
  cli::write_file_atomic(dir / "c5_error_floor.csv", w.str());
  return {violations == 0,
          std::to_string(cases) + " deterministic tests, " +
              std::to_string(violations) + " below the floor, worst margin " +
              fmt("%.3g", worst)};
}

CheckResult check_tv_cross(std::uint64_t seed, const fs::path& dir) {
  csv::Writer w({"instance", "exact_tv", "tv_hat", "std_error", "gap"});
  int violations = 0;
  double worst_sigmas = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    rng::Stream stream(rng::derive(seed, rng::Role::Scratch, 205, i));
    FloorInstance inst = make_floor_instance(seed, i, stream);
    auto mc = detect::mc_tv_estimate(
        inst.codebook, 2, inst.pair, 1000000,
        rng::derive(seed, rng::Role::Scratch, 207, i));
    double gap = std::abs(mc.tv_hat - inst.exact_tv);
    if (!(gap <= 3.0 * mc.std_error)) ++violations;
    if (mc.std_error > 0.0) worst_sigmas = std::max(worst_sigmas,
                                                    gap / mc.std_error);
    w.row(static_cast<std::int64_t>(i), inst.exact_tv, mc.tv_hat,
          mc.std_error, gap);
  }
  cli::write_file_atomic(dir / "c6_tv_cross_check.csv", w.str());
  return {violations == 0,
          "10 instances at 1e6 trials, worst gap " +
              fmt("%.2f", worst_sigmas) + " std errors"};
}

cli::ExperimentConfig desk_config(std::uint64_t seed, bool gaussian) {
  cli::ExperimentConfig config;
  if (gaussian) {
    config.family = cli::ChannelFamily::Awgn;
    config.awgn = AwgnPair(0.25, 1.0);
    config.tv_trials = 400;
    config.max_codebook = 64;
  } else {
    config.family = cli::ChannelFamily::Dmc;
    config.dmc = DmcPair::bsc(0.05, 0.10);
    config.tv_trials = 1000;
    config.max_codebook = 1024;
  }
  config.slots.kind = cli::SlotRule::Kind::Fixed;
  config.slots.fixed_count = 100;
  config.n_list = {10000};
  config.trials = 2000;
  config.seed = seed;
  return config;
}

CheckResult check_desk_link(std::uint64_t seed, const fs::path& dir) {
  std::string detail;
  bool pass = true;
  for (bool gaussian : {false, true}) {
    double start = now_s();
    cli::SimulateResult result = cli::run_simulate(desk_config(seed, gaussian));
    double elapsed = now_s() - start;
    const char* family = gaussian ? "awgn" : "dmc";
    cli::write_file_atomic(
        dir / (std::string("c7_") + family + "_desk.csv"),
        cli::simulate_csv(result, false));
    if (result.status != "ok" || result.rows.size() != 1) {
      pass = false;
      detail += std::string(family) + " status " + result.status + "; ";
      continue;
    }
    const cli::SimulateRow& row = result.rows[0];
    bool reliable = row.p_e_hat < 0.05;
    bool covert = row.tv_hat <= 0.5 + 3.0 * row.tv_se;
    bool in_time = elapsed < 600.0;
    if (!(reliable && covert && in_time)) pass = false;
    detail += std::string(family) + " p_e " + fmt("%.4f", row.p_e_hat) +
              ", tv " + fmt("%.4f", row.tv_hat) + " (" +
              fmt("%.0f", elapsed) + "s); ";
  }
  if (!detail.empty()) detail.resize(detail.size() - 2);
  return {pass, detail};
}

CheckResult check_detection_trend(std::uint64_t seed, const fs::path& dir) {
  const std::int64_t grid[] = {200, 800, 3200};
  const std::int64_t trials = 10000;
  const double epsilon = 1.2;
  bool pass = true;
  std::string detail;
  for (bool gaussian : {false, true}) {
    const char* family = gaussian ? "awgn" : "dmc";
    csv::Writer w({"family", "n", "L", "tau", "alpha_hat", "beta_hat", "sum",
                   "alpha_cap"});
    double prev_sum = 2.0;
    std::string sums;
    for (std::int64_t n : grid) {
      std::int64_t L = n;
      detect::RocPoint roc;
      double tau = 0.0;
      if (gaussian) {
        double sigma_w2 = 1.0;
        tau = bounds::awgn_detection_tau(n, L, epsilon, sigma_w2);
        double power = 1.5 * bounds::awgn_power_threshold(n, L, sigma_w2);
        auto cb = codec::generate_codebook(
            codec::CodebookKind::Bpsk, 64, static_cast<std::size_t>(n),
            std::sqrt(power / static_cast<double>(n)),
            rng::derive(seed, rng::Role::Scratch, 208,
                        static_cast<std::uint64_t>(n)));
        detect::DetectionTest test{detect::DetectionKind::AwgnPower, tau,
                                   static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(L)};
        roc = detect::estimate_roc(cb, static_cast<std::size_t>(L), sigma_w2,
                                   test, trials,
                                   rng::derive(seed, rng::Role::Scratch, 209,
                                               static_cast<std::uint64_t>(n)));
      } else {
        DmcPair pair = DmcPair::bsc(0.05, 0.10);
        double chi2 = chi_squared(pair.q1, pair.q0);
        tau = bounds::dmc_detection_tau(n, L, epsilon, chi2);
        std::int64_t w_star = std::llround(
            1.5 * bounds::dmc_weight_threshold(n, L, chi2));
        w_star = std::clamp<std::int64_t>(w_star, 1, n);
        auto cb = codec::constant_weight_codebook(
            64, static_cast<std::size_t>(n), static_cast<std::size_t>(w_star),
            rng::derive(seed, rng::Role::Scratch, 208,
                        static_cast<std::uint64_t>(n)));
        detect::DetectionTest test{detect::DetectionKind::DmcWeight, tau,
                                   static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(L)};
        roc = detect::estimate_roc(cb, static_cast<std::size_t>(L), pair, test,
                                   trials,
                                   rng::derive(seed, rng::Role::Scratch, 209,
                                               static_cast<std::uint64_t>(n)));
      }
      double sum = roc.false_alarm + roc.missed_detection;
      double cap = 3.0 * std::pow(static_cast<double>(L), -0.2);
      if (!(sum < prev_sum)) pass = false;
      if (!(roc.false_alarm <= cap)) pass = false;
      prev_sum = sum;
      sums += fmt("%.3f", sum) + " ";
      w.row(std::string(family), n, L, tau, roc.false_alarm,
            roc.missed_detection, sum, cap);
    }
    cli::write_file_atomic(
        dir / (std::string("c8_") + family + "_trend.csv"), w.str());
    detail += std::string(family) + " sums " + sums + "; ";
  }
  if (!detail.empty()) detail.resize(detail.size() - 2);
  return {pass, detail};
}

CheckResult check_sweep_convergence(std::uint64_t seed, const fs::path& dir) {
  cli::ExperimentConfig config;
  config.family = cli::ChannelFamily::Awgn;
  config.awgn = AwgnPair(0.25, 1.0);
  config.slots.kind = cli::SlotRule::Kind::Polynomial;
  config.slots.kappa = 1.0;
  config.n_list = {100, 316, 1000, 3162, 10000};
  config.trials = 100;
  config.tv_trials = 50;
  config.seed = seed;
  config.max_codebook = 16;

  cli::SweepResult result = cli::run_sweep(config);
  cli::write_file_atomic(dir / "c9_sweep.csv", cli::sweep_csv(result));
  if (result.status != "ok" || result.rows.empty())
    return {false, "sweep status " + result.status};

  bool pass = true;
  for (const cli::SweepRow& row : result.rows)
    if (row.feasible && !(row.normalized < result.upper)) pass = false;
  const cli::SweepRow& last = result.rows.back();
  double rel_gap = std::abs(last.normalized - result.target) / result.target;
  if (!(last.feasible && last.reliable && last.covert && rel_gap <= 0.10))
    pass = false;
  return {pass, "largest n normalized " + fmt("%.4f", last.normalized) +
                    " vs target " + fmt("%.4f", result.target) + " (" +
                    fmt("%.1f", 100.0 * rel_gap) +
                    "% off), all points under upper line " +
                    fmt("%.4f", result.upper)};
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    files[fs::relative(entry.path(), root).string()] = buffer.str();
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 42;
  fs::path out_root = "acceptance_out";
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
      out_root = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--seed N] [--out DIR]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Check> checks = {
      {"slot-mixture-kl-dominance", 10.0, check_mixture_dominance},
      {"gaussian-mixture-kl-dominance", 60.0, check_gaussian_dominance},
      {"signal-level-round-trip", 1.0, check_round_trip},
      {"capacity-bound-ratio", 1.0, check_capacity_ratio},
      {"detection-error-floor", 30.0, check_error_floor},
      {"tv-estimator-cross-check", 300.0, check_tv_cross},
      {"desk-scale-covert-link", 1200.0, check_desk_link},
      {"desk-scale-detection-trend", 600.0, check_detection_trend},
      {"throughput-sweep-convergence", 900.0, check_sweep_convergence},
  };

  fs::remove_all(out_root);
  fs::path run1 = out_root / "run1";
  fs::path run2 = out_root / "run2";
  fs::create_directories(run1);
  fs::create_directories(run2);

  bool all_pass = true;
  auto report = [&](std::size_t index, const std::string& name, bool pass,
                    double elapsed, const std::string& detail) {
    std::printf("[%s] %zu %s (%.1fs): %s\n", pass ? "PASS" : "FAIL", index,
                name.c_str(), elapsed, detail.c_str());
    std::fflush(stdout);
    if (!pass) all_pass = false;
  };

  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Check& check = checks[i];
    double start = now_s();
    CheckResult result;
    try {
      result = check.body(seed, run1);
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    double elapsed = now_s() - start;
    if (elapsed >= check.limit_s) {
      result.pass = false;
      result.detail += " [over the " + fmt("%.0f", check.limit_s) +
                       "s limit]";
    }
    report(i + 1, check.name, result.pass, elapsed, result.detail);
  }

  double rerun_start = now_s();
  std::string rerun_detail;
  bool rerun_pass = true;
  for (const Check& check : checks) {
    try {
      check.body(seed, run2);
    } catch (const std::exception& e) {
      rerun_pass = false;
      rerun_detail = check.name + std::string(" raised: ") + e.what();
    }
  }
  if (rerun_pass) {
    auto first = snapshot_tree(run1);
    auto second = snapshot_tree(run2);
    if (first.size() != second.size()) {
      rerun_pass = false;
      rerun_detail = "file counts differ: " + std::to_string(first.size()) +
                     " vs " + std::to_string(second.size());
    } else {
      std::size_t matched = 0;
      for (const auto& [name, bytes] : first) {
        auto it = second.find(name);
        if (it == second.end()) {
          rerun_pass = false;
          rerun_detail = name + " missing from the rerun";
          break;
        }
        if (it->second != bytes) {
          rerun_pass = false;
          rerun_detail = name + " differs between runs";
          break;
        }
        ++matched;
      }
      if (rerun_pass)
        rerun_detail = std::to_string(matched) +
                       " files byte-identical across reruns";
    }
  }
  report(10, "seeded-rerun-determinism", rerun_pass, now_s() - rerun_start,
         rerun_detail);

  std::printf("%s\n", all_pass ? "acceptance: all checks passed"
                               : "acceptance: one or more checks failed");
  return all_pass ? 0 : 1;
}
