#include "covertslot/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "covertslot/kernels.hpp"
#include "covertslot/parallel.hpp"
#include "covertslot/rng.hpp"

namespace covertslot::detect {

namespace {

constexpr double kCostCap = 1e11;

void require_trials(std::int64_t trials) {
  if (trials < 1) throw NonPositiveTrials("need at least one trial");
}

std::vector<std::int64_t> sample_multinomial(rng::Stream& stream,
                                             std::int64_t count,
                                             const std::vector<double>& probs) {
  std::vector<std::int64_t> out(probs.size(), 0);
  double mass_left = 1.0;
  std::int64_t left = count;
  for (std::size_t z = 0; z + 1 < probs.size() && left > 0; ++z) {
    double p = std::clamp(probs[z] / mass_left, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> bin(left, p);
    std::int64_t c = bin(stream);
    out[z] = c;
    left -= c;
    mass_left -= probs[z];
  }
  out[probs.size() - 1] += left;
  return out;
}

double statistic_from_counts(const std::vector<std::int64_t>& counts,
                             const std::vector<double>& per_symbol,
                             std::size_t n) {
  double sum = 0.0;
  for (std::size_t z = 0; z < counts.size(); ++z)
    if (counts[z] > 0) sum += static_cast<double>(counts[z]) * per_symbol[z];
  return sum / static_cast<double>(n);
}

struct BinomialTally {
  std::vector<std::uint8_t> hits;

  void init(std::int64_t trials) {
    hits.assign(static_cast<std::size_t>(trials), 0);
  }
  std::pair<double, double> reduce() const {
    double sum = 0.0;
    for (std::uint8_t h : hits) sum += h;
    double n = static_cast<double>(hits.size());
    double p = sum / n;
    return {p, std::sqrt(std::max(0.0, p * (1.0 - p)) / n)};
  }
};

double signed_dot(const double* signs, const double* z, std::size_t n) {
  return fixed_order_dot(signs, z, n);
}

}  // namespace

double dmc_weight_statistic(std::span<const std::uint8_t> slot,
                            const LlrWeight& weight) {
  if (slot.empty()) throw LengthMismatch("slot must be nonempty");
  double sum = 0.0;
  for (std::uint8_t z : slot) {
    if (z >= weight.values().size())
      throw RangeViolation("symbol outside the observer alphabet");
    sum += weight[z];
  }
  return sum / static_cast<double>(slot.size());
}

double awgn_power_statistic(std::span<const double> slot, double sigma_w2) {
  if (slot.empty()) throw LengthMismatch("slot must be nonempty");
  if (!(sigma_w2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  double sum = 0.0;
  for (double z : slot) sum += z * z;
  return sum / static_cast<double>(slot.size()) - sigma_w2;
}

double dmc_lr_statistic(std::span<const std::uint8_t> slot,
                        const LlrWeight& weight, double alpha) {
  if (slot.empty()) throw LengthMismatch("slot must be nonempty");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw OutOfRangeAlpha("bias must lie in [0, 1]");
  double sum = 0.0;
  for (std::uint8_t z : slot) {
    if (z >= weight.values().size())
      throw RangeViolation("symbol outside the observer alphabet");
    sum += std::log1p(alpha * weight[z]);
  }
  return sum / static_cast<double>(slot.size());
}

double awgn_lr_statistic(std::span<const double> slot, double amplitude,
                         double sigma_w2) {
  if (slot.empty()) throw LengthMismatch("slot must be nonempty");
  double sum = 0.0;
  for (double z : slot)
    sum += std::log1p(gaussian_llr_weight(z, amplitude, sigma_w2));
  return sum / static_cast<double>(slot.size());
}

double threshold(DetectionKind kind, std::size_t n, std::size_t L,
                 double epsilon, const DmcChannelStats& stats) {
  if (kind != DetectionKind::DmcWeight)
    throw InvalidParameters(
        "only the weight statistic has a closed-form level on this channel");
  return bounds::dmc_detection_tau(static_cast<std::int64_t>(n),
                                   static_cast<std::int64_t>(L), epsilon,
                                   stats.weight.chi2());
}

double threshold(DetectionKind kind, std::size_t n, std::size_t L,
                 double epsilon, const AwgnChannelStats& stats) {
  if (kind != DetectionKind::AwgnPower)
    throw InvalidParameters(
        "only the power statistic has a closed-form level on this channel");
  return bounds::awgn_detection_tau(static_cast<std::int64_t>(n),
                                    static_cast<std::int64_t>(L), epsilon,
                                    stats.sigma_w2);
}

bool max_slot_detect(std::span<const std::uint8_t> frame,
                     const DetectionTest& test, const DmcChannelStats& stats) {
  if (test.n < 1 || test.L < 1) throw InvalidParameters("need n >= 1, L >= 1");
  if (frame.size() != test.n * test.L)
    throw LengthMismatch("frame length does not match n * L");
  for (std::size_t t = 0; t < test.L; ++t) {
    auto slot = frame.subspan(t * test.n, test.n);
    double s = 0.0;
    switch (test.kind) {
      case DetectionKind::DmcWeight:
        s = dmc_weight_statistic(slot, stats.weight);
        break;
      case DetectionKind::LikelihoodRatio:
        s = dmc_lr_statistic(slot, stats.weight, stats.alpha);
        break;
      default:
        throw InvalidParameters("statistic does not apply to this channel");
    }
    if (s > test.tau) return true;
  }
  return false;
}

bool max_slot_detect(std::span<const double> frame, const DetectionTest& test,
                     const AwgnChannelStats& stats) {
  if (test.n < 1 || test.L < 1) throw InvalidParameters("need n >= 1, L >= 1");
  if (frame.size() != test.n * test.L)
    throw LengthMismatch("frame length does not match n * L");
  for (std::size_t t = 0; t < test.L; ++t) {
    auto slot = frame.subspan(t * test.n, test.n);
    double s = 0.0;
    switch (test.kind) {
      case DetectionKind::AwgnPower:
        s = awgn_power_statistic(slot, stats.sigma_w2);
        break;
      case DetectionKind::LikelihoodRatio:
        s = awgn_lr_statistic(slot, stats.amplitude, stats.sigma_w2);
        break;
      default:
        throw InvalidParameters("statistic does not apply to this channel");
    }
    if (s > test.tau) return true;
  }
  return false;
}

RocPoint estimate_roc(const codec::Codebook& cb, std::size_t L,
                      const DmcPair& channel, const DetectionTest& test,
                      std::int64_t trials, std::uint64_t seed) {
  require_trials(trials);
  if (L < 1) throw InvalidParameters("need L >= 1");
  if (test.n != cb.n() || test.L != L)
    throw InvalidParameters("test dimensions do not match the scenario");
  if (test.kind == DetectionKind::AwgnPower)
    throw InvalidParameters("statistic does not apply to this channel");
  LlrWeight weight(channel.q1, channel.q0);
  std::size_t n = cb.n();
  std::vector<double> per_symbol(weight.values().size());
  for (std::size_t z = 0; z < per_symbol.size(); ++z)
    per_symbol[z] = test.kind == DetectionKind::LikelihoodRatio
                        ? std::log1p(cb.param() * weight[z])
                        : weight[z];

  std::vector<std::size_t> weights(cb.size());
  for (std::size_t w = 0; w < cb.size(); ++w) weights[w] = cb.weight(w);

  const std::vector<double>& q0 = channel.q0.probs();
  const std::vector<double>& q1 = channel.q1.probs();

  BinomialTally fa, md;
  fa.init(trials);
  md.init(trials);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    rng::Stream h0(rng::derive(seed, rng::Role::RocNull, trial));
    bool alarm = false;
    for (std::size_t t = 0; t < L && !alarm; ++t) {
      auto counts = sample_multinomial(h0, static_cast<std::int64_t>(n), q0);
      alarm = statistic_from_counts(counts, per_symbol, n) > test.tau;
    }
    fa.hits[trial] = alarm ? 1 : 0;

    rng::Stream h1(rng::derive(seed, rng::Role::RocActive, trial));
    std::size_t w = static_cast<std::size_t>(h1.uniform_int(cb.size()));
    std::size_t live = static_cast<std::size_t>(h1.uniform_int(L));
    bool detected = false;
    for (std::size_t t = 0; t < L && !detected; ++t) {
      std::vector<std::int64_t> counts;
      if (t == live) {
        std::int64_t k = static_cast<std::int64_t>(weights[w]);
        counts = sample_multinomial(h1, k, q1);
        auto idle = sample_multinomial(
            h1, static_cast<std::int64_t>(n) - k, q0);
        for (std::size_t z = 0; z < counts.size(); ++z) counts[z] += idle[z];
      } else {
        counts = sample_multinomial(h1, static_cast<std::int64_t>(n), q0);
      }
      detected = statistic_from_counts(counts, per_symbol, n) > test.tau;
    }
    md.hits[trial] = detected ? 0 : 1;
  });
  auto [fa_p, fa_se] = fa.reduce();
  auto [md_p, md_se] = md.reduce();
  return {fa_p, fa_se, md_p, md_se};
}

RocPoint estimate_roc(const codec::Codebook& cb, std::size_t L,
                      double sigma_w2, const DetectionTest& test,
                      std::int64_t trials, std::uint64_t seed) {
  require_trials(trials);
  if (L < 1) throw InvalidParameters("need L >= 1");
  if (!(sigma_w2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  if (test.n != cb.n() || test.L != L)
    throw InvalidParameters("test dimensions do not match the scenario");
  std::size_t n = cb.n();
  double sd = std::sqrt(sigma_w2);
  double a = cb.amplitude();

  BinomialTally fa, md;
  fa.init(trials);
  md.init(trials);

  if (test.kind == DetectionKind::AwgnPower) {
    double P = cb.power(0);
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
      rng::Stream h0(rng::derive(seed, rng::Role::RocNull, trial));
      std::gamma_distribution<double> idle_sum(static_cast<double>(n) / 2.0,
                                               2.0 * sigma_w2);
      bool alarm = false;
      for (std::size_t t = 0; t < L && !alarm; ++t) {
        double s = idle_sum(h0) / static_cast<double>(n) - sigma_w2;
        alarm = s > test.tau;
      }
      fa.hits[trial] = alarm ? 1 : 0;

      rng::Stream h1(rng::derive(seed, rng::Role::RocActive, trial));
      std::size_t live = static_cast<std::size_t>(h1.uniform_int(L));
      std::gamma_distribution<double> rest_sum(
          (static_cast<double>(n) - 1.0) / 2.0, 2.0 * sigma_w2);
      bool detected = false;
      for (std::size_t t = 0; t < L && !detected; ++t) {
        double sum;
        if (t == live) {
          double axis = std::sqrt(P) + sd * h1.normal();
          sum = axis * axis;
          if (n > 1) sum += rest_sum(h1);
        } else {
          sum = idle_sum(h1);
        }
        detected = sum / static_cast<double>(n) - sigma_w2 > test.tau;
      }
      md.hits[trial] = detected ? 0 : 1;
    });
  } else if (test.kind == DetectionKind::LikelihoodRatio) {
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
      rng::Stream h0(rng::derive(seed, rng::Role::RocNull, trial));
      std::vector<double> slot(n);
      bool alarm = false;
      for (std::size_t t = 0; t < L && !alarm; ++t) {
        for (std::size_t i = 0; i < n; ++i) slot[i] = sd * h0.normal();
        alarm = awgn_lr_statistic(slot, a, sigma_w2) > test.tau;
      }
      fa.hits[trial] = alarm ? 1 : 0;

      rng::Stream h1(rng::derive(seed, rng::Role::RocActive, trial));
      std::size_t w = static_cast<std::size_t>(h1.uniform_int(cb.size()));
      std::size_t live = static_cast<std::size_t>(h1.uniform_int(L));
      auto row = cb.row(w);
      bool detected = false;
      for (std::size_t t = 0; t < L && !detected; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
          double x = t == live ? (row[i] ? a : -a) : 0.0;
          slot[i] = x + sd * h1.normal();
        }
        detected = awgn_lr_statistic(slot, a, sigma_w2) > test.tau;
      }
      md.hits[trial] = detected ? 0 : 1;
    });
  } else {
    throw InvalidParameters("statistic does not apply to this channel");
  }
  auto [fa_p, fa_se] = fa.reduce();
  auto [md_p, md_se] = md.reduce();
  return {fa_p, fa_se, md_p, md_se};
}

TvEstimate mc_tv_estimate(const codec::Codebook& cb, std::size_t L,
                          const DmcPair& channel, std::int64_t trials,
                          std::uint64_t seed) {
  require_trials(trials);
  if (L < 1) throw InvalidParameters("need L >= 1");
  double cost = static_cast<double>(cb.size()) * static_cast<double>(cb.n()) *
                static_cast<double>(trials);
  if (cost > kCostCap)
    throw CostCapExceeded("size * n * trials exceeds the sampling budget");

  std::size_t n = cb.n();
  std::size_t N = n * L;
  const std::vector<double>& q0 = channel.q0.probs();
  const std::vector<double>& q1 = channel.q1.probs();
  std::vector<double> llr(q0.size());
  for (std::size_t z = 0; z < q0.size(); ++z) {
    if (q0[z] == 0.0)
      llr[z] = 0.0;
    else
      llr[z] = q1[z] > 0.0 ? std::log(q1[z] / q0[z])
                           : -std::numeric_limits<double>::infinity();
  }
  std::vector<std::vector<std::uint32_t>> support(cb.size());
  for (std::size_t w = 0; w < cb.size(); ++w)
    for (std::size_t i = 0; i < n; ++i)
      if (cb.bit(w, i)) support[w].push_back(static_cast<std::uint32_t>(i));

  std::vector<double> values(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    rng::Stream stream(rng::derive(seed, rng::Role::TvNoise, trial));
    std::vector<std::uint8_t> z(N);
    for (std::size_t i = 0; i < N; ++i) {
      double u = stream.uniform();
      double acc = 0.0;
      std::size_t sym = q0.size() - 1;
      for (std::size_t s = 0; s + 1 < q0.size(); ++s) {
        acc += q0[s];
        if (u < acc) {
          sym = s;
          break;
        }
      }
      z[i] = static_cast<std::uint8_t>(sym);
    }
    double max_g = -std::numeric_limits<double>::infinity();
    std::vector<double> g(L * cb.size());
    std::size_t idx = 0;
    for (std::size_t t = 0; t < L; ++t) {
      const std::uint8_t* slot = z.data() + t * n;
      for (std::size_t w = 0; w < cb.size(); ++w) {
        double s = 0.0;
        for (std::uint32_t i : support[w]) s += llr[slot[i]];
        g[idx++] = s;
        if (s > max_g) max_g = s;
      }
    }
    double denom = static_cast<double>(L) * static_cast<double>(cb.size());
    double r;
    if (max_g <= 700.0) {
      double sum = 0.0;
      for (double v : g) sum += std::exp(v);
      r = sum / denom;
    } else {
      double sum = 0.0;
      for (double v : g) sum += std::exp(v - max_g);
      r = std::exp(max_g + std::log(sum / denom));
    }
    values[trial] = 0.5 * std::abs(r - 1.0);
  });
  double sum = 0.0, sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  double mean = sum / static_cast<double>(trials);
  double var = std::max(0.0, sum_sq / static_cast<double>(trials) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(trials))};
}

TvEstimate mc_tv_estimate(const codec::Codebook& cb, std::size_t L,
                          double sigma_w2, std::int64_t trials,
                          std::uint64_t seed) {
  require_trials(trials);
  if (L < 1) throw InvalidParameters("need L >= 1");
  if (!(sigma_w2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  double cost = static_cast<double>(cb.size()) * static_cast<double>(cb.n()) *
                static_cast<double>(trials);
  if (cost > kCostCap)
    throw CostCapExceeded("size * n * trials exceeds the sampling budget");

  std::size_t n = cb.n();
  std::size_t N = n * L;
  double a = cb.amplitude();
  double sd = std::sqrt(sigma_w2);
  double scale = a / sigma_w2;
  double offset = static_cast<double>(n) * a * a / (2.0 * sigma_w2);
  std::vector<double> signs(cb.size() * n);
  for (std::size_t w = 0; w < cb.size(); ++w)
    for (std::size_t i = 0; i < n; ++i)
      signs[w * n + i] = cb.bit(w, i) ? 1.0 : -1.0;

  std::vector<double> values(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    rng::Stream stream(rng::derive(seed, rng::Role::TvNoise, trial));
    std::vector<double> z(N);
    for (std::size_t i = 0; i < N; ++i) z[i] = sd * stream.normal();
    std::vector<double> g(L * cb.size());
    double max_g = -std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < cb.size(); ++w) {
      const double* sw = signs.data() + w * n;
      for (std::size_t t = 0; t < L; ++t) {
        double v = scale * signed_dot(sw, z.data() + t * n, n) - offset;
        g[t * cb.size() + w] = v;
        if (v > max_g) max_g = v;
      }
    }
    double denom = static_cast<double>(L) * static_cast<double>(cb.size());
    double r;
    if (max_g <= 700.0) {
      double sum = 0.0;
      for (double v : g) sum += std::exp(v);
      r = sum / denom;
    } else {
      double sum = 0.0;
      for (double v : g) sum += std::exp(v - max_g);
      r = std::exp(max_g + std::log(sum / denom));
    }
    values[trial] = 0.5 * std::abs(r - 1.0);
  });
  double sum = 0.0, sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  double mean = sum / static_cast<double>(trials);
  double var = std::max(0.0, sum_sq / static_cast<double>(trials) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(trials))};
}

WeightPartition weight_partition(const codec::Codebook& cb, std::size_t L,
                                 double chi2_or_sigma_w2) {
  if (L < 1) throw InvalidParameters("need L >= 1");
  WeightPartition out;
  auto n = static_cast<std::int64_t>(cb.n());
  auto Lq = static_cast<std::int64_t>(L);
  if (cb.kind() == codec::CodebookKind::Bpsk) {
    out.threshold = bounds::awgn_power_threshold(n, Lq, chi2_or_sigma_w2);
    for (std::size_t w = 0; w < cb.size(); ++w) {
      bool low = cb.power(w) <= out.threshold;
      (low ? out.low_rows : out.high_rows)
          .push_back(static_cast<std::uint32_t>(w));
    }
  } else {
    out.threshold = bounds::dmc_weight_threshold(n, Lq, chi2_or_sigma_w2);
    for (std::size_t w = 0; w < cb.size(); ++w) {
      bool low = static_cast<double>(cb.weight(w)) <= out.threshold;
      (low ? out.low_rows : out.high_rows)
          .push_back(static_cast<std::uint32_t>(w));
    }
  }
  out.low_fraction =
      static_cast<double>(out.low_rows.size()) / static_cast<double>(cb.size());
  if (!out.low_rows.empty()) out.low = cb.subset(out.low_rows);
  if (!out.high_rows.empty()) out.high = cb.subset(out.high_rows);
  return out;
}

DmcDetectionDiagnostics dmc_detection_diagnostics(const DmcPair& channel,
                                                  std::size_t n, std::size_t L,
                                                  double epsilon,
                                                  double codeword_weight) {
  if (n < 1 || L < 2) throw InvalidParameters("need n >= 1 and L >= 2");
  if (!(epsilon > 1.0)) throw InvalidParameters("epsilon must exceed 1");
  if (!(codeword_weight >= 0.0))
    throw NonPositiveArgument("codeword weight must be >= 0");
  LlrWeight weight(channel.q1, channel.q0);
  double chi2 = weight.chi2();
  DmcDetectionDiagnostics out;
  out.mu0 = 0.0;
  out.sigma0_sq = chi2;
  out.mu1 = chi2;
  double second_live = 0.0;
  for (std::size_t z = 0; z < channel.q1.size(); ++z)
    second_live += channel.q1[z] * weight[z] * weight[z];
  out.sigma1_sq = second_live - chi2 * chi2;
  double numer = static_cast<double>(n) * out.sigma0_sq +
                 codeword_weight * (out.sigma1_sq - out.sigma0_sq);
  double root = epsilon * std::sqrt(2.0 * static_cast<double>(n) * chi2 *
                                    std::log(static_cast<double>(L)));
  double denom = codeword_weight * chi2 - root;
  out.beta_chebyshev =
      denom > 0.0 ? std::clamp(numer / (denom * denom), 0.0, 1.0) : 1.0;
  return out;
}

AwgnDetectionDiagnostics awgn_detection_diagnostics(double sigma_w2,
                                                    std::size_t n,
                                                    std::size_t L,
                                                    double epsilon,
                                                    double codeword_power) {
  if (n < 1 || L < 2) throw InvalidParameters("need n >= 1 and L >= 2");
  if (!(epsilon > 1.0)) throw InvalidParameters("epsilon must exceed 1");
  if (!(sigma_w2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  if (!(codeword_power >= 0.0))
    throw NonPositiveArgument("codeword power must be >= 0");
  double numer = 2.0 * static_cast<double>(n) * sigma_w2 * sigma_w2 +
                 4.0 * sigma_w2 * codeword_power;
  double root = epsilon * std::sqrt(4.0 * static_cast<double>(n) * sigma_w2 *
                                    sigma_w2 * std::log(static_cast<double>(L)));
  double denom = codeword_power - root;
  AwgnDetectionDiagnostics out;
  out.beta_chebyshev =
      denom > 0.0 ? std::clamp(numer / (denom * denom), 0.0, 1.0) : 1.0;
  return out;
}

}  // namespace covertslot::detect
