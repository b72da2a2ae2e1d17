#include "covertslot/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "covertslot/csv.hpp"
#include "covertslot/detection.hpp"
#include "covertslot/exact.hpp"
#include "covertslot/rng.hpp"
#include "covertslot/svg.hpp"
#include "covertslot/toml_lite.hpp"

namespace covertslot::cli {

namespace {

using bounds::ReferenceKind;
using codec::CodebookKind;

constexpr double kReliableErrorCap = 0.05;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::int64_t to_count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 9e15)
    throw ConfigError(std::string(what) + " must be a nonnegative integer");
  return static_cast<std::int64_t>(v);
}

}  // namespace

std::int64_t SlotRule::slots_for(std::int64_t n) const {
  if (n < 1) throw InvalidParameters("need n >= 1");
  if (kind == Kind::Fixed) return fixed_count;
  double v = std::pow(static_cast<double>(n), kappa);
  if (v > 9e15) throw InvalidParameters("slot count overflows");
  return std::max<std::int64_t>(2, std::llround(v));
}

void ExperimentConfig::validate() const {
  if (family == ChannelFamily::Dmc && !dmc)
    throw ConfigError("discrete channel parameters are missing");
  if (family == ChannelFamily::Awgn && !awgn)
    throw ConfigError("Gaussian channel parameters are missing");
  if (n_list.empty()) throw ConfigError("the n grid must be nonempty");
  for (std::int64_t n : n_list)
    if (n < 1) throw ConfigError("every n must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (tv_trials < 0) throw ConfigError("tv_trials must be >= 0");
  if (max_codebook < 1) throw ConfigError("max_codebook must be >= 1");
  if (slots.kind == SlotRule::Kind::Fixed && slots.fixed_count < 1)
    throw ConfigError("slot count must be >= 1");
  if (slots.kind == SlotRule::Kind::Polynomial &&
      !(slots.kappa > 0.0 && slots.kappa <= 2.0))
    throw ConfigError("slot exponent must lie in (0, 2]");
  try {
    params.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

namespace {

class ConfigReader {
 public:
  explicit ConfigReader(const toml::Table& table) : table_(table) {}

  bool has(const std::string& key) const { return table_.count(key) > 0; }

  const toml::Value& get(const std::string& key) {
    auto it = table_.find(key);
    if (it == table_.end()) throw ConfigError("missing key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key) {
    const toml::Value& v = get(key);
    if (v.kind != toml::Value::Kind::String)
      throw ConfigError("key '" + key + "' must be a string");
    return v.text;
  }

  double get_number(const std::string& key) {
    const toml::Value& v = get(key);
    if (v.kind != toml::Value::Kind::Number)
      throw ConfigError("key '" + key + "' must be a number");
    return v.number;
  }

  bool get_bool(const std::string& key) {
    const toml::Value& v = get(key);
    if (v.kind != toml::Value::Kind::Boolean)
      throw ConfigError("key '" + key + "' must be a boolean");
    return v.boolean;
  }

  std::vector<double> get_list(const std::string& key) {
    const toml::Value& v = get(key);
    if (v.kind != toml::Value::Kind::NumberList)
      throw ConfigError("key '" + key + "' must be an array of numbers");
    return v.list;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : table_)
      if (!used_.count(key)) throw ConfigError("unknown key '" + key + "'");
  }

 private:
  const toml::Table& table_;
  std::set<std::string> used_;
};

FiniteDistribution dist_from_list(const std::vector<double>& probs) {
  return FiniteDistribution(probs);
}

}  // namespace

ExperimentConfig parse_config(std::string_view toml_text) {
  toml::Table table = toml::parse(toml_text);
  ConfigReader reader(table);
  ExperimentConfig config;

  std::string family = reader.get_string("channel.family");
  if (family == "dmc") {
    config.family = ChannelFamily::Dmc;
    if (reader.has("channel.p0")) {
      config.dmc.emplace(dist_from_list(reader.get_list("channel.p0")),
                         dist_from_list(reader.get_list("channel.p1")),
                         dist_from_list(reader.get_list("channel.q0")),
                         dist_from_list(reader.get_list("channel.q1")));
    } else {
      config.dmc = DmcPair::bsc(reader.get_number("channel.receiver_flip"),
                                reader.get_number("channel.observer_flip"));
    }
  } else if (family == "awgn") {
    config.family = ChannelFamily::Awgn;
    config.awgn.emplace(reader.get_number("channel.sigma_b2"),
                        reader.get_number("channel.sigma_w2"));
  } else {
    throw ConfigError("channel.family must be \"dmc\" or \"awgn\"");
  }

  if (reader.has("slots.rule")) {
    std::string rule = reader.get_string("slots.rule");
    if (rule == "fixed")
      config.slots.kind = SlotRule::Kind::Fixed;
    else if (rule == "polynomial")
      config.slots.kind = SlotRule::Kind::Polynomial;
    else
      throw ConfigError("slots.rule must be \"fixed\" or \"polynomial\"");
  }
  if (reader.has("slots.count"))
    config.slots.fixed_count = to_count(reader.get_number("slots.count"),
                                        "slots.count");
  if (reader.has("slots.kappa"))
    config.slots.kappa = reader.get_number("slots.kappa");

  for (double v : reader.get_list("experiment.n"))
    config.n_list.push_back(to_count(v, "experiment.n entries"));

  if (reader.has("experiment.delta"))
    config.params.delta = reader.get_number("experiment.delta");
  if (reader.has("experiment.nu1"))
    config.params.nu1 = reader.get_number("experiment.nu1");
  if (reader.has("experiment.nu2"))
    config.params.nu2 = reader.get_number("experiment.nu2");
  if (reader.has("experiment.delta1"))
    config.params.delta1 = reader.get_number("experiment.delta1");
  if (reader.has("experiment.delta2"))
    config.params.delta2 = reader.get_number("experiment.delta2");
  if (reader.has("experiment.epsilon"))
    config.params.epsilon = reader.get_number("experiment.epsilon");
  if (reader.has("experiment.trials"))
    config.trials = to_count(reader.get_number("experiment.trials"), "trials");
  if (reader.has("experiment.tv_trials"))
    config.tv_trials =
        to_count(reader.get_number("experiment.tv_trials"), "tv_trials");
  if (reader.has("experiment.seed"))
    config.seed = static_cast<std::uint64_t>(
        to_count(reader.get_number("experiment.seed"), "seed"));
  if (reader.has("experiment.out"))
    config.out_dir = reader.get_string("experiment.out");
  if (reader.has("experiment.max_codebook"))
    config.max_codebook =
        to_count(reader.get_number("experiment.max_codebook"), "max_codebook");
  if (reader.has("experiment.strict_slot"))
    config.strict_slot = reader.get_bool("experiment.strict_slot");

  reader.reject_unknown();
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str());
}

namespace {

/** One fully parameterized operating point of the achievability scheme. */
struct SchemePoint {
  std::int64_t n = 0;
  std::int64_t L = 0;
  double level = 0.0;  // alpha_n or rho_n
  double gamma = 0.0;
  codec::MessageSize msize;
  std::uint64_t m_sim = 1;
};

SchemePoint plan_point(const ExperimentConfig& config, std::int64_t n) {
  SchemePoint point;
  point.n = n;
  point.L = config.slots.slots_for(n);
  if (config.family == ChannelFamily::Dmc) {
    LlrWeight weight(config.dmc->q1, config.dmc->q0);
    point.level = bounds::choose_alpha_n(n, point.L, config.params.delta,
                                         weight.chi2());
    if (!(point.level > 0.0))
      throw CovertnessInfeasible("selected bias is zero at this n");
    auto moments = bounds::info_density_moments_dmc(
        config.dmc->p0, config.dmc->p1, point.level, ReferenceKind::MixtureRef);
    point.gamma = codec::decoder_threshold(static_cast<std::size_t>(n),
                                           config.params.nu1, moments);
    point.msize = codec::message_size(static_cast<std::size_t>(n),
                                      config.params.delta1, config.params.nu1,
                                      moments);
  } else {
    point.level = bounds::choose_rho_n(n, point.L, config.params.delta,
                                       config.awgn->sigma_w2);
    if (!(point.level > 0.0))
      throw CovertnessInfeasible("selected power is zero at this n");
    point.gamma = codec::decoder_threshold(static_cast<std::size_t>(n),
                                           config.params.nu1, point.level,
                                           config.awgn->sigma_b2);
    point.msize = codec::message_size(static_cast<std::size_t>(n),
                                      config.params.delta1, config.params.nu1,
                                      point.level, config.awgn->sigma_b2);
  }
  point.m_sim = point.msize.saturated
                    ? static_cast<std::uint64_t>(config.max_codebook)
                    : std::min<std::uint64_t>(
                          point.msize.m,
                          static_cast<std::uint64_t>(config.max_codebook));
  return point;
}

struct MeasuredPoint {
  SchemePoint scheme;
  double p_e_hat = 0.0, p_e_se = 0.0;
  double tv_hat = 0.0, tv_se = 0.0;
};

MeasuredPoint measure_point(const ExperimentConfig& config, std::int64_t n) {
  MeasuredPoint out;
  out.scheme = plan_point(config, n);
  const SchemePoint& sp = out.scheme;
  std::int64_t tv_trials = config.tv_trials > 0 ? config.tv_trials
                                                : config.trials;
  std::uint64_t cb_seed = rng::derive(config.seed, rng::Role::Instance,
                                      static_cast<std::uint64_t>(n), 0);
  std::uint64_t pe_seed = rng::derive(config.seed, rng::Role::Instance,
                                      static_cast<std::uint64_t>(n), 1);
  std::uint64_t tv_seed = rng::derive(config.seed, rng::Role::Instance,
                                      static_cast<std::uint64_t>(n), 2);
  if (config.family == ChannelFamily::Dmc) {
    auto cb = codec::generate_codebook(CodebookKind::DmcBernoulli, sp.m_sim,
                                       static_cast<std::size_t>(sp.n), sp.level,
                                       cb_seed);
    codec::DecoderConfig dcfg{sp.gamma, ReferenceKind::MixtureRef};
    auto pe = codec::estimate_error_prob(
        cb, static_cast<std::size_t>(sp.L), config.dmc->p0, config.dmc->p1,
        sp.level, dcfg, config.trials, pe_seed, config.strict_slot);
    auto tv = detect::mc_tv_estimate(cb, static_cast<std::size_t>(sp.L),
                                     *config.dmc, tv_trials, tv_seed);
    out.p_e_hat = pe.p_e_hat;
    out.p_e_se = pe.std_error;
    out.tv_hat = tv.tv_hat;
    out.tv_se = tv.std_error;
  } else {
    auto cb = codec::generate_codebook(CodebookKind::Bpsk, sp.m_sim,
                                       static_cast<std::size_t>(sp.n),
                                       std::sqrt(sp.level), cb_seed);
    codec::DecoderConfig dcfg{sp.gamma, ReferenceKind::PureRef};
    auto pe = codec::estimate_error_prob(cb, static_cast<std::size_t>(sp.L),
                                         config.awgn->sigma_b2, dcfg,
                                         config.trials, pe_seed,
                                         config.strict_slot);
    auto tv = detect::mc_tv_estimate(cb, static_cast<std::size_t>(sp.L),
                                     config.awgn->sigma_w2, tv_trials, tv_seed);
    out.p_e_hat = pe.p_e_hat;
    out.p_e_se = pe.std_error;
    out.tv_hat = tv.tv_hat;
    out.tv_se = tv.std_error;
  }
  return out;
}

}  // namespace

BoundsReport run_bounds(const ExperimentConfig& config) {
  config.validate();
  nlohmann::json root;
  root["family"] = config.family == ChannelFamily::Dmc ? "dmc" : "awgn";

  nlohmann::json channel;
  if (config.family == ChannelFamily::Dmc) {
    const DmcPair& ch = *config.dmc;
    LlrWeight weight(ch.q1, ch.q0);
    channel["kl_receiver"] = kl_divergence(ch.p1, ch.p0);
    channel["kl_observer"] = kl_divergence(ch.q1, ch.q0);
    channel["chi2_observer"] = weight.chi2();
    channel["tv_observer"] = tv_distance(ch.q1, ch.q0);
  } else {
    channel["sigma_b2"] = config.awgn->sigma_b2;
    channel["sigma_w2"] = config.awgn->sigma_w2;
  }
  root["channel"] = channel;

  nlohmann::json capacity;
  try {
    bounds::CapacityBounds cap =
        config.family == ChannelFamily::Dmc
            ? bounds::dmc_capacity_bounds(*config.dmc)
            : bounds::awgn_capacity_bounds(*config.awgn);
    capacity["lower"] = cap.lower;
    capacity["upper"] = cap.upper;
    capacity["target"] = config.params.size_factor() * cap.lower;
    if (config.family == ChannelFamily::Dmc)
      capacity["key_throughput"] = bounds::key_throughput(*config.dmc);
  } catch (const KeylessConditionViolated& e) {
    capacity["error"] = e.what();
  }
  root["capacity"] = capacity;

  nlohmann::json points = nlohmann::json::array();
  for (std::int64_t n : config.n_list) {
    nlohmann::json entry;
    entry["n"] = n;
    std::int64_t L = config.slots.slots_for(n);
    entry["L"] = L;
    entry["budget"] = bounds::covertness_budget(n, config.params.delta);
    try {
      SchemePoint sp = plan_point(config, n);
      entry["feasible"] = true;
      bounds::SlotKlBound kl;
      if (config.family == ChannelFamily::Dmc) {
        LlrWeight weight(config.dmc->q1, config.dmc->q0);
        entry["alpha_n"] = sp.level;
        kl = bounds::dmc_slot_kl_bound(n, L, sp.level, weight.chi2());
        auto moments = bounds::info_density_moments_dmc(
            config.dmc->p0, config.dmc->p1, sp.level,
            ReferenceKind::MixtureRef);
        entry["moments"] = {{"mean", moments.mean},
                            {"second_moment", moments.second_moment},
                            {"abs_max", moments.abs_max}};
        if (L >= 2) {
          entry["detection_tau"] = bounds::dmc_detection_tau(
              n, L, config.params.epsilon, weight.chi2());
          entry["weight_split"] = bounds::dmc_weight_threshold(n, L,
                                                               weight.chi2());
        }
      } else {
        entry["rho_n"] = sp.level;
        kl = bounds::awgn_slot_kl_bound(n, L, sp.level, config.awgn->sigma_w2);
        if (L >= 2) {
          entry["detection_tau"] = bounds::awgn_detection_tau(
              n, L, config.params.epsilon, config.awgn->sigma_w2);
          entry["power_split"] = bounds::awgn_power_threshold(
              n, L, config.awgn->sigma_w2);
        }
      }
      entry["slot_kl"] = {{"exact_form", kl.exact_form},
                          {"exp_form", kl.exp_form},
                          {"log_exact_form", kl.log_exact_form},
                          {"log_exp_form", kl.log_exp_form},
                          {"overflow", kl.overflow}};
      entry["gamma"] = sp.gamma;
      entry["log_m"] = sp.msize.log_m;
      entry["m_saturated"] = sp.msize.saturated;
      if (!sp.msize.saturated) entry["m"] = sp.msize.m;
    } catch (const CovertnessInfeasible& e) {
      entry["feasible"] = false;
      entry["reason"] = e.what();
    }
    points.push_back(entry);
  }
  root["points"] = points;

  BoundsReport report;
  report.json = root.dump(2) + "\n";
  return report;
}

SimulateResult run_simulate(const ExperimentConfig& config) {
  config.validate();
  SimulateResult result;
  for (std::int64_t n : config.n_list) {
    double start = now_seconds();
    try {
      MeasuredPoint mp = measure_point(config, n);
      SimulateRow row;
      row.n = n;
      row.L = mp.scheme.L;
      row.log_m = mp.scheme.msize.log_m;
      row.p_e_hat = mp.p_e_hat;
      row.p_e_se = mp.p_e_se;
      row.tv_hat = mp.tv_hat;
      row.tv_se = mp.tv_se;
      row.runtime_s = now_seconds() - start;
      result.rows.push_back(row);
    } catch (const Error& e) {
      result.status = e.what();
      break;
    }
  }
  return result;
}

std::string simulate_csv(const SimulateResult& result, bool include_runtime) {
  std::vector<std::string> header = {"n",      "L",       "log_M",
                                     "p_e_hat", "p_e_se", "tv_hat",
                                     "tv_se"};
  if (include_runtime) header.push_back("runtime_s");
  csv::Writer w;
  w.append_row(header);
  for (const SimulateRow& r : result.rows) {
    std::vector<std::string> cells = {
        csv::cell(r.n),      csv::cell(r.L),      csv::cell(r.log_m),
        csv::cell(r.p_e_hat), csv::cell(r.p_e_se), csv::cell(r.tv_hat),
        csv::cell(r.tv_se)};
    if (include_runtime) cells.push_back(csv::cell(r.runtime_s));
    w.append_row(cells);
  }
  if (result.status != "ok") w.append_row({"error", result.status});
  return w.str();
}

namespace {

struct DetectScenario {
  codec::Codebook codebook;
  detect::DetectionTest test;
};

DetectRow run_detect_leg(const ExperimentConfig& config,
                         const DetectScenario& scenario, std::int64_t n,
                         std::int64_t L, std::uint64_t seed) {
  detect::RocPoint roc =
      config.family == ChannelFamily::Dmc
          ? detect::estimate_roc(scenario.codebook,
                                 static_cast<std::size_t>(L), *config.dmc,
                                 scenario.test, config.trials, seed)
          : detect::estimate_roc(scenario.codebook,
                                 static_cast<std::size_t>(L),
                                 config.awgn->sigma_w2, scenario.test,
                                 config.trials, seed);
  DetectRow row;
  row.n = n;
  row.L = L;
  row.tau = scenario.test.tau;
  row.alpha_hat = roc.false_alarm;
  row.beta_hat = roc.missed_detection;
  row.sum = roc.false_alarm + roc.missed_detection;
  return row;
}

}  // namespace

DetectResult run_detect(const ExperimentConfig& config) {
  config.validate();
  DetectResult result;
  nlohmann::json diags = nlohmann::json::array();
  constexpr std::size_t kAboveRows = 64;
  try {
    for (std::int64_t n : config.n_list) {
      std::int64_t L = config.slots.slots_for(n);
      if (L < 2) throw InvalidParameters("detection needs at least two slots");
      nlohmann::json diag;
      diag["n"] = n;
      diag["L"] = L;
      std::uint64_t nz = static_cast<std::uint64_t>(n);

      if (config.family == ChannelFamily::Dmc) {
        LlrWeight weight(config.dmc->q1, config.dmc->q0);
        double tau = bounds::dmc_detection_tau(n, L, config.params.epsilon,
                                               weight.chi2());
        diag["tau"] = tau;
        double split = bounds::dmc_weight_threshold(n, L, weight.chi2());
        std::int64_t w_star = std::llround(1.5 * split);
        if (w_star < 1) w_star = 1;
        if (w_star > n)
          throw InvalidParameters(
              "converse weight exceeds the slot length; raise n");
        auto cb_above = codec::constant_weight_codebook(
            kAboveRows, static_cast<std::size_t>(n),
            static_cast<std::size_t>(w_star),
            rng::derive(config.seed, rng::Role::Instance, nz, 3));
        detect::DetectionTest test{detect::DetectionKind::DmcWeight, tau,
                                   static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(L)};
        result.above.push_back(run_detect_leg(
            config, {cb_above, test}, n, L,
            rng::derive(config.seed, rng::Role::Instance, nz, 4)));
        auto d_above = detect::dmc_detection_diagnostics(
            *config.dmc, static_cast<std::size_t>(n),
            static_cast<std::size_t>(L), config.params.epsilon,
            static_cast<double>(w_star));
        diag["above"] = {{"weight", w_star},
                         {"weight_split", split},
                         {"mu0", d_above.mu0},
                         {"sigma0_sq", d_above.sigma0_sq},
                         {"mu1", d_above.mu1},
                         {"sigma1_sq", d_above.sigma1_sq},
                         {"beta_chebyshev", d_above.beta_chebyshev}};
        try {
          double alpha_n = bounds::choose_alpha_n(n, L, config.params.delta,
                                                  weight.chi2());
          if (!(alpha_n > 0.0))
            throw CovertnessInfeasible("selected bias is zero at this n");
          auto cb_below = codec::generate_codebook(
              CodebookKind::DmcBernoulli,
              std::min<std::uint64_t>(config.max_codebook, 256),
              static_cast<std::size_t>(n), alpha_n,
              rng::derive(config.seed, rng::Role::Instance, nz, 5));
          result.below.push_back(run_detect_leg(
              config, {cb_below, test}, n, L,
              rng::derive(config.seed, rng::Role::Instance, nz, 6)));
          auto d_below = detect::dmc_detection_diagnostics(
              *config.dmc, static_cast<std::size_t>(n),
              static_cast<std::size_t>(L), config.params.epsilon,
              alpha_n * static_cast<double>(n));
          diag["below"] = {{"alpha_n", alpha_n},
                           {"mean_weight", alpha_n * static_cast<double>(n)},
                           {"beta_chebyshev", d_below.beta_chebyshev}};
        } catch (const CovertnessInfeasible& e) {
          diag["below"] = {{"skipped", e.what()}};
        }
      } else {
        double sigma_w2 = config.awgn->sigma_w2;
        double tau = bounds::awgn_detection_tau(n, L, config.params.epsilon,
                                                sigma_w2);
        diag["tau"] = tau;
        double split = bounds::awgn_power_threshold(n, L, sigma_w2);
        double power_above = 1.5 * split;
        auto cb_above = codec::generate_codebook(
            CodebookKind::Bpsk, kAboveRows, static_cast<std::size_t>(n),
            std::sqrt(power_above / static_cast<double>(n)),
            rng::derive(config.seed, rng::Role::Instance, nz, 3));
        detect::DetectionTest test{detect::DetectionKind::AwgnPower, tau,
                                   static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(L)};
        result.above.push_back(run_detect_leg(
            config, {cb_above, test}, n, L,
            rng::derive(config.seed, rng::Role::Instance, nz, 4)));
        auto d_above = detect::awgn_detection_diagnostics(
            sigma_w2, static_cast<std::size_t>(n), static_cast<std::size_t>(L),
            config.params.epsilon, power_above);
        diag["above"] = {{"power", power_above},
                         {"power_split", split},
                         {"beta_chebyshev", d_above.beta_chebyshev}};
        try {
          double rho_n = bounds::choose_rho_n(n, L, config.params.delta,
                                              sigma_w2);
          if (!(rho_n > 0.0))
            throw CovertnessInfeasible("selected power is zero at this n");
          auto cb_below = codec::generate_codebook(
              CodebookKind::Bpsk,
              std::min<std::uint64_t>(config.max_codebook, 256),
              static_cast<std::size_t>(n), std::sqrt(rho_n),
              rng::derive(config.seed, rng::Role::Instance, nz, 5));
          result.below.push_back(run_detect_leg(
              config, {cb_below, test}, n, L,
              rng::derive(config.seed, rng::Role::Instance, nz, 6)));
          auto d_below = detect::awgn_detection_diagnostics(
              sigma_w2, static_cast<std::size_t>(n),
              static_cast<std::size_t>(L), config.params.epsilon,
              rho_n * static_cast<double>(n));
          diag["below"] = {{"rho_n", rho_n},
                           {"frame_power", rho_n * static_cast<double>(n)},
                           {"beta_chebyshev", d_below.beta_chebyshev}};
        } catch (const CovertnessInfeasible& e) {
          diag["below"] = {{"skipped", e.what()}};
        }
      }
      diags.push_back(diag);
    }

    // Threshold sweep at the largest n, above-split codebook.
    std::int64_t n_max = config.n_list.back();
    for (std::int64_t n : config.n_list) n_max = std::max(n_max, n);
    std::int64_t L = config.slots.slots_for(n_max);
    std::uint64_t nz = static_cast<std::uint64_t>(n_max);
    std::int64_t sweep_trials = std::max<std::int64_t>(200, config.trials / 10);
    const double factors[] = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0};
    if (config.family == ChannelFamily::Dmc) {
      LlrWeight weight(config.dmc->q1, config.dmc->q0);
      double tau0 = bounds::dmc_detection_tau(n_max, L, config.params.epsilon,
                                              weight.chi2());
      std::int64_t w_star = std::llround(
          1.5 * bounds::dmc_weight_threshold(n_max, L, weight.chi2()));
      w_star = std::clamp<std::int64_t>(w_star, 1, n_max);
      auto cb = codec::constant_weight_codebook(
          kAboveRows, static_cast<std::size_t>(n_max),
          static_cast<std::size_t>(w_star),
          rng::derive(config.seed, rng::Role::Instance, nz, 3));
      for (double f : factors) {
        detect::DetectionTest test{detect::DetectionKind::DmcWeight, f * tau0,
                                   static_cast<std::size_t>(n_max),
                                   static_cast<std::size_t>(L)};
        auto roc = detect::estimate_roc(
            cb, static_cast<std::size_t>(L), *config.dmc, test, sweep_trials,
            rng::derive(config.seed, rng::Role::Instance, nz, 7));
        result.roc_sweep.push_back({f * tau0, roc.false_alarm,
                                    roc.false_alarm_se, roc.missed_detection,
                                    roc.missed_detection_se});
      }
    } else {
      double sigma_w2 = config.awgn->sigma_w2;
      double tau0 = bounds::awgn_detection_tau(n_max, L, config.params.epsilon,
                                               sigma_w2);
      double power_above =
          1.5 * bounds::awgn_power_threshold(n_max, L, sigma_w2);
      auto cb = codec::generate_codebook(
          CodebookKind::Bpsk, kAboveRows, static_cast<std::size_t>(n_max),
          std::sqrt(power_above / static_cast<double>(n_max)),
          rng::derive(config.seed, rng::Role::Instance, nz, 3));
      for (double f : factors) {
        detect::DetectionTest test{detect::DetectionKind::AwgnPower, f * tau0,
                                   static_cast<std::size_t>(n_max),
                                   static_cast<std::size_t>(L)};
        auto roc = detect::estimate_roc(
            cb, static_cast<std::size_t>(L), sigma_w2, test, sweep_trials,
            rng::derive(config.seed, rng::Role::Instance, nz, 7));
        result.roc_sweep.push_back({f * tau0, roc.false_alarm,
                                    roc.false_alarm_se, roc.missed_detection,
                                    roc.missed_detection_se});
      }
    }
  } catch (const Error& e) {
    result.status = e.what();
  }
  result.diagnostics_json = diags.dump(2) + "\n";
  return result;
}

std::string detect_csv(const std::vector<DetectRow>& rows) {
  csv::Writer w({"n", "L", "tau", "alpha_hat", "beta_hat", "sum"});
  for (const DetectRow& r : rows)
    w.row(r.n, r.L, r.tau, r.alpha_hat, r.beta_hat, r.sum);
  return w.str();
}

std::string roc_csv(const std::vector<RocSweepRow>& rows) {
  csv::Writer w({"tau", "alpha_hat", "alpha_se", "beta_hat", "beta_se"});
  for (const RocSweepRow& r : rows)
    w.row(r.tau, r.alpha_hat, r.alpha_se, r.beta_hat, r.beta_se);
  return w.str();
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepResult result;
  try {
    bounds::CapacityBounds cap =
        config.family == ChannelFamily::Dmc
            ? bounds::dmc_capacity_bounds(*config.dmc)
            : bounds::awgn_capacity_bounds(*config.awgn);
    result.lower = cap.lower;
    result.upper = cap.upper;
    result.target = config.params.size_factor() * cap.lower;
    for (std::int64_t n : config.n_list) {
      std::int64_t L = config.slots.slots_for(n);
      if (L < 2)
        throw InvalidParameters("throughput sweep needs at least two slots");
      SweepRow row;
      row.n = n;
      row.L = L;
      try {
        MeasuredPoint mp = measure_point(config, n);
        row.feasible = true;
        row.log_m = mp.scheme.msize.log_m;
        row.normalized = row.log_m /
                         std::sqrt(static_cast<double>(n) *
                                   std::log(static_cast<double>(L)));
        row.p_e_hat = mp.p_e_hat;
        row.p_e_se = mp.p_e_se;
        row.tv_hat = mp.tv_hat;
        row.tv_se = mp.tv_se;
        row.reliable = row.p_e_hat < kReliableErrorCap;
        row.covert = row.tv_hat <= config.params.delta + 3.0 * row.tv_se;
      } catch (const CovertnessInfeasible&) {
        row.feasible = false;
      }
      result.rows.push_back(row);
    }
  } catch (const Error& e) {
    result.status = e.what();
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  csv::Writer w({"n", "L", "log_M", "normalized", "p_e_hat", "p_e_se",
                 "tv_hat", "tv_se", "feasible", "reliable", "covert"});
  for (const SweepRow& r : result.rows)
    w.row(r.n, r.L, r.log_m, r.normalized, r.p_e_hat, r.p_e_se, r.tv_hat,
          r.tv_se, r.feasible, r.reliable, r.covert);
  if (result.status != "ok") w.append_row({"error", result.status});
  return w.str();
}

std::string sweep_svg(const SweepResult& result) {
  svg::ChartSpec spec;
  spec.title = "Normalized covert throughput vs frame length";
  spec.x_label = "slot length n";
  spec.y_label = "log M / sqrt(n log L)";
  spec.log_x = true;

  std::vector<double> xs, ys;
  double xmin = 0.0, xmax = 0.0;
  for (const SweepRow& r : result.rows) {
    if (xmin == 0.0) xmin = static_cast<double>(r.n);
    xmin = std::min(xmin, static_cast<double>(r.n));
    xmax = std::max(xmax, static_cast<double>(r.n));
    if (r.feasible) {
      xs.push_back(static_cast<double>(r.n));
      ys.push_back(r.normalized);
    }
  }
  if (xs.empty() || xmin <= 0.0)
    throw InvalidParameters("sweep chart needs at least one feasible row");

  auto hline = [&](double y, const std::string& label,
                   const std::string& color) {
    svg::Series s;
    s.label = label;
    s.color = color;
    s.dashed = true;
    s.x = {xmin, xmax};
    s.y = {y, y};
    return s;
  };
  spec.series.push_back(hline(result.upper, "upper bound", "#b23a3a"));
  spec.series.push_back(hline(result.lower, "lower bound", "#3a7d3a"));
  spec.series.push_back(
      hline(result.target, "slack-adjusted target", "#8a6d1f"));
  svg::Series achieved;
  achieved.label = "achieved";
  achieved.color = "#1f6fb2";
  achieved.markers = true;
  achieved.x = xs;
  achieved.y = ys;
  spec.series.push_back(achieved);
  return svg::render_line_chart(spec);
}

namespace {

struct CheckContext {
  std::uint64_t seed;
  bool corrupt;
  std::vector<OracleCheckItem> items;

  void add(const std::string& name, bool pass, const std::string& detail) {
    items.push_back({name, pass, detail});
  }
};

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

DmcPair random_binary_pair(rng::Stream& stream) {
  for (;;) {
    double u = 0.1 + 0.8 * stream.uniform();
    double v = 0.1 + 0.8 * stream.uniform();
    if (std::abs(u - v) < 0.02) continue;
    FiniteDistribution q0({u, 1.0 - u});
    FiniteDistribution q1({v, 1.0 - v});
    return DmcPair(q0, q1, q0, q1);
  }
}

void check_mixture_grid(CheckContext& ctx) {
  rng::Stream stream(rng::derive(ctx.seed, rng::Role::Scratch, 1));
  int cases = 0, failures = 0;
  double max_slack = -1e300;
  for (int c = 0; c < 12; ++c) {
    DmcPair pair = random_binary_pair(stream);
    double chi2 = chi_squared(pair.q1, pair.q0);
    for (std::size_t n = 1; n <= 3; ++n) {
      for (std::size_t L = 1; L <= 3; ++L) {
        for (double alpha : {0.15, 0.45, 0.85}) {
          exact::ExactInstance instance(n, L, pair, alpha);
          auto mixture_law = exact::exact_mixture_law(instance);
          auto idle_law = exact::product_law(pair.q0, n * L);
          double kl = exact::exact_kl(mixture_law, idle_law);
          auto bound = bounds::dmc_slot_kl_bound(
              static_cast<std::int64_t>(n), static_cast<std::int64_t>(L),
              alpha, chi2);
          double exact_form = bound.exact_form * (ctx.corrupt ? 0.5 : 1.0);
          ++cases;
          if (!(kl <= exact_form + 1e-9 && kl <= bound.exp_form + 1e-9))
            ++failures;
          max_slack = std::max(max_slack, kl - exact_form);
        }
      }
    }
  }
  ctx.add("mixture-kl-bound-grid", failures == 0,
          std::to_string(cases) + " cases, " + std::to_string(failures) +
              " violations, max kl minus bound " + fmt_g(max_slack));
}

void check_pinsker(CheckContext& ctx) {
  rng::Stream stream(rng::derive(ctx.seed, rng::Role::Scratch, 2));
  int cases = 0, failures = 0;
  for (int c = 0; c < 12; ++c) {
    DmcPair pair = random_binary_pair(stream);
    for (std::size_t n = 1; n <= 3; ++n) {
      for (double alpha : {0.2, 0.6}) {
        exact::ExactInstance instance(n, 2, pair, alpha);
        auto mixture_law = exact::exact_mixture_law(instance);
        auto idle_law = exact::product_law(pair.q0, 2 * n);
        double kl = exact::exact_kl(mixture_law, idle_law);
        double tv = exact::exact_tv(mixture_law, idle_law);
        ++cases;
        if (!(tv <= std::sqrt(kl / 2.0) + 1e-12)) ++failures;
      }
    }
  }
  ctx.add("pinsker-on-tables", failures == 0,
          std::to_string(cases) + " cases, " + std::to_string(failures) +
              " violations");
}

void check_convexity(CheckContext& ctx) {
  int cases = 0, failures = 0;
  for (int c = 0; c < 8; ++c) {
    rng::Stream stream(rng::derive(ctx.seed, rng::Role::Scratch, 3, c));
    DmcPair pair = random_binary_pair(stream);
    auto cb = codec::generate_codebook(
        CodebookKind::DmcBernoulli, 8, 2, 0.3,
        rng::derive(ctx.seed, rng::Role::Scratch, 4, c));
    exact::ExactInstance frame(2, 2, pair, 0.3, cb);
    exact::ExactInstance single(2, 1, pair, 0.3, cb);
    double tv_frame = exact::exact_tv(exact::exact_induced_law(frame),
                                      exact::product_law(pair.q0, 4));
    double tv_single = exact::exact_tv(exact::exact_induced_law(single),
                                       exact::product_law(pair.q0, 2));
    ++cases;
    if (!(tv_frame <= tv_single + 1e-12)) ++failures;
  }
  ctx.add("slot-averaging-contracts-tv", failures == 0,
          std::to_string(cases) + " cases, " + std::to_string(failures) +
              " violations");
}

void check_hypothesis_floor(CheckContext& ctx) {
  int cases = 0, failures = 0;
  for (int c = 0; c < 6; ++c) {
    rng::Stream stream(rng::derive(ctx.seed, rng::Role::Scratch, 5, c));
    DmcPair pair = random_binary_pair(stream);
    auto cb = codec::generate_codebook(
        CodebookKind::DmcBernoulli, 8, 2, 0.35,
        rng::derive(ctx.seed, rng::Role::Scratch, 6, c));
    exact::ExactInstance frame(2, 2, pair, 0.35, cb);
    auto induced = exact::exact_induced_law(frame);
    auto idle = exact::product_law(pair.q0, 4);
    double tv = exact::exact_tv(induced, idle);
    for (int t = 0; t < 20; ++t) {
      double alarm = 0.0, miss = 1.0;
      for (std::size_t i = 0; i < idle.size(); ++i) {
        if (stream.uniform() < 0.5) {
          alarm += idle[i];
          miss -= induced[i];
        }
      }
      ++cases;
      if (!(alarm + miss >= 1.0 - tv - 1e-9)) ++failures;
    }
  }
  ctx.add("decision-error-floor", failures == 0,
          std::to_string(cases) + " tests, " + std::to_string(failures) +
              " below the total-variation floor");
}

void check_soft_covering(CheckContext& ctx) {
  double kl_small_total = 0.0, kl_big_total = 0.0;
  for (int c = 0; c < 8; ++c) {
    rng::Stream stream(rng::derive(ctx.seed, rng::Role::Scratch, 7, c));
    DmcPair pair = random_binary_pair(stream);
    auto mixture_law = exact::exact_mixture_law(
        exact::ExactInstance(2, 2, pair, 0.3));
    auto small = codec::generate_codebook(
        CodebookKind::DmcBernoulli, 12, 2, 0.3,
        rng::derive(ctx.seed, rng::Role::Scratch, 8, c));
    auto big = codec::generate_codebook(
        CodebookKind::DmcBernoulli, 400, 2, 0.3,
        rng::derive(ctx.seed, rng::Role::Scratch, 9, c));
    kl_small_total += exact::exact_kl(
        exact::exact_induced_law(exact::ExactInstance(2, 2, pair, 0.3, small)),
        mixture_law);
    kl_big_total += exact::exact_kl(
        exact::exact_induced_law(exact::ExactInstance(2, 2, pair, 0.3, big)),
        mixture_law);
  }
  ctx.add("soft-covering-shrinks-with-size", kl_big_total < kl_small_total,
          "summed divergence to the mixture law: size 400 gives " +
              fmt_g(kl_big_total) + ", size 12 gives " + fmt_g(kl_small_total));
}

void check_gaussian_frame_kl(CheckContext& ctx) {
  double sigma_w2 = 1.0, rho = 0.5;
  auto bound = bounds::awgn_slot_kl_bound(2, 2, rho, sigma_w2);
  auto mc = exact::mc_kl_awgn(2, 2, rho, sigma_w2, 100000,
                              rng::derive(ctx.seed, rng::Role::Scratch, 10));
  bool pass = mc.estimate <= bound.exact_form + 3.0 * mc.std_error &&
              mc.estimate >= -3.0 * mc.std_error;
  ctx.add("gaussian-frame-kl-mc", pass,
          "estimate " + fmt_g(mc.estimate) + " +/- " + fmt_g(mc.std_error) +
              ", bound " + fmt_g(bound.exact_form));
}

void check_roc_cross(CheckContext& ctx) {
  std::size_t n = 40, L = 6;
  rng::Stream setup(rng::derive(ctx.seed, rng::Role::Scratch, 11));
  DmcPair pair = random_binary_pair(setup);
  LlrWeight weight(pair.q1, pair.q0);
  auto cb = codec::constant_weight_codebook(
      16, n, 12, rng::derive(ctx.seed, rng::Role::Scratch, 12));
  double tau = 0.8 * std::sqrt(2.0 * weight.chi2() *
                               std::log(static_cast<double>(L)) /
                               static_cast<double>(n));
  detect::DetectionTest test{detect::DetectionKind::DmcWeight, tau, n, L};
  std::int64_t trials = 4000;
  auto fast = detect::estimate_roc(cb, L, pair, test, trials,
                                   rng::derive(ctx.seed, rng::Role::Scratch, 13));

  detect::DmcChannelStats stats(pair);
  std::int64_t fa_hits = 0, md_hits = 0;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    rng::Stream h0(rng::derive(ctx.seed, rng::Role::Scratch, 14, trial));
    std::vector<std::uint8_t> frame(n * L);
    for (auto& z : frame) z = h0.uniform() < pair.q0[0] ? 0 : 1;
    if (detect::max_slot_detect(frame, test, stats)) ++fa_hits;

    rng::Stream h1(rng::derive(ctx.seed, rng::Role::Scratch, 15, trial));
    std::size_t w = static_cast<std::size_t>(h1.uniform_int(cb.size()));
    std::size_t live = static_cast<std::size_t>(h1.uniform_int(L));
    for (std::size_t t = 0; t < L; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        bool active = t == live && cb.bit(w, i);
        double p0 = active ? pair.q1[0] : pair.q0[0];
        frame[t * n + i] = h1.uniform() < p0 ? 0 : 1;
      }
    }
    if (!detect::max_slot_detect(frame, test, stats)) ++md_hits;
  }
  double fa = static_cast<double>(fa_hits) / static_cast<double>(trials);
  double md = static_cast<double>(md_hits) / static_cast<double>(trials);
  double fa_se = std::sqrt(fa * (1 - fa) / static_cast<double>(trials));
  double md_se = std::sqrt(md * (1 - md) / static_cast<double>(trials));
  double fa_gap = std::abs(fa - fast.false_alarm);
  double md_gap = std::abs(md - fast.missed_detection);
  double fa_tol =
      5.0 * std::sqrt(fa_se * fa_se + fast.false_alarm_se * fast.false_alarm_se) +
      1e-9;
  double md_tol = 5.0 * std::sqrt(md_se * md_se + fast.missed_detection_se *
                                                      fast.missed_detection_se) +
                  1e-9;
  ctx.add("roc-count-vs-symbol-sampling",
          fa_gap <= fa_tol && md_gap <= md_tol,
          "false-alarm gap " + fmt_g(fa_gap) + " (tol " + fmt_g(fa_tol) +
              "), miss gap " + fmt_g(md_gap) + " (tol " + fmt_g(md_tol) + ")");
}

void check_tv_estimator(CheckContext& ctx) {
  rng::Stream setup(rng::derive(ctx.seed, rng::Role::Scratch, 16));
  DmcPair pair = random_binary_pair(setup);
  auto cb = codec::generate_codebook(
      CodebookKind::DmcBernoulli, 8, 2, 0.3,
      rng::derive(ctx.seed, rng::Role::Scratch, 17));
  exact::ExactInstance frame(2, 2, pair, 0.3, cb);
  double tv_exact = exact::exact_tv(exact::exact_induced_law(frame),
                                    exact::product_law(pair.q0, 4));
  auto mc = detect::mc_tv_estimate(cb, 2, pair, 50000,
                                   rng::derive(ctx.seed, rng::Role::Scratch, 18));
  double gap = std::abs(mc.tv_hat - tv_exact);
  double tol = 4.0 * mc.std_error + 1e-6;
  ctx.add("tv-estimator-vs-enumeration", gap <= tol,
          "gap " + fmt_g(gap) + " with tolerance " + fmt_g(tol));
}

}  // namespace

OracleCheckResult run_oracle_check(std::uint64_t seed, bool corrupt_bound) {
  CheckContext ctx{seed, corrupt_bound, {}};
  check_mixture_grid(ctx);
  check_pinsker(ctx);
  check_convexity(ctx);
  check_hypothesis_floor(ctx);
  check_soft_covering(ctx);
  check_gaussian_frame_kl(ctx);
  check_roc_cross(ctx);
  check_tv_estimator(ctx);

  OracleCheckResult result;
  result.items = std::move(ctx.items);
  result.all_pass = true;
  for (const auto& item : result.items) {
    result.text += std::string(item.pass ? "[ok]   " : "[FAIL] ") + item.name +
                   ": " + item.detail + "\n";
    if (!item.pass) result.all_pass = false;
  }
  result.text += result.all_pass ? "all checks passed\n"
                                 : "one or more checks failed\n";
  return result;
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content) {
  std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream file(temp, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + temp.string() + " for writing");
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!file) throw IoError("short write to " + temp.string());
  }
  std::filesystem::rename(temp, path);
}

}  // namespace covertslot::cli
