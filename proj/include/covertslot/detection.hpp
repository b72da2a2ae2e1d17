/**
 * Observer-side detection machinery: per-slot statistics, the max-over-slots
 * threshold detector, Monte Carlo operating points under both hypotheses,
 * an estimator of the total-variation gap seen by the observer, codeword
 * partitioning at the converse split point, and Chebyshev-style
 * missed-detection diagnostics.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "covertslot/bounds.hpp"
#include "covertslot/codec.hpp"
#include "covertslot/distributions.hpp"

namespace covertslot::detect {

enum class DetectionKind { DmcWeight, AwgnPower, LikelihoodRatio };

struct DetectionTest {
  DetectionKind kind = DetectionKind::DmcWeight;
  double tau = 0.0;
  std::size_t n = 0;
  std::size_t L = 0;
};

/** Observer-side context for discrete statistics. */
struct DmcChannelStats {
  LlrWeight weight;
  double alpha = 0.0;

  DmcChannelStats(const DmcPair& channel, double alpha_in = 0.0)
      : weight(channel.q1, channel.q0), alpha(alpha_in) {}
};

/** Observer-side context for Gaussian statistics. */
struct AwgnChannelStats {
  double sigma_w2 = 0.0;
  double amplitude = 0.0;
};

/** Centered per-slot statistic (1/n) sum of the weight values. */
double dmc_weight_statistic(std::span<const std::uint8_t> slot,
                            const LlrWeight& weight);

/** Centered per-slot statistic (1/n) sum of z^2 minus sigma_w2. */
double awgn_power_statistic(std::span<const double> slot, double sigma_w2);

/** Per-slot statistic (1/n) sum of log(1 + alpha * weight). */
double dmc_lr_statistic(std::span<const std::uint8_t> slot,
                        const LlrWeight& weight, double alpha);

/** Gaussian analogue with weight exp(-rho/(2 s2)) cosh(a z / s2) - 1. */
double awgn_lr_statistic(std::span<const double> slot, double amplitude,
                         double sigma_w2);

/** Level of the matching statistic; requires epsilon > 1 and L >= 2. */
double threshold(DetectionKind kind, std::size_t n, std::size_t L,
                 double epsilon, const DmcChannelStats& stats);
double threshold(DetectionKind kind, std::size_t n, std::size_t L,
                 double epsilon, const AwgnChannelStats& stats);

/** Declares a transmission when any slot statistic exceeds test.tau. */
bool max_slot_detect(std::span<const std::uint8_t> frame,
                     const DetectionTest& test, const DmcChannelStats& stats);
bool max_slot_detect(std::span<const double> frame, const DetectionTest& test,
                     const AwgnChannelStats& stats);

struct RocPoint {
  double false_alarm = 0.0;
  double false_alarm_se = 0.0;
  double missed_detection = 0.0;
  double missed_detection_se = 0.0;
};

/**
 * Monte Carlo operating point of the detector.  False alarms are measured on
 * all-idle frames; missed detections on frames carrying a uniform codeword
 * in a uniform slot.  Weight and power statistics are sampled through their
 * sufficient statistics (symbol counts, or chi-square laws), so their cost
 * scales with L rather than n L.  Likelihood-ratio tests take the bias or
 * amplitude from the codebook metadata.
 */
RocPoint estimate_roc(const codec::Codebook& cb, std::size_t L,
                      const DmcPair& channel, const DetectionTest& test,
                      std::int64_t trials, std::uint64_t seed);
RocPoint estimate_roc(const codec::Codebook& cb, std::size_t L,
                      double sigma_w2, const DetectionTest& test,
                      std::int64_t trials, std::uint64_t seed);

struct TvEstimate {
  double tv_hat = 0.0;
  double std_error = 0.0;
};

/**
 * Estimates the total variation between the codebook-induced observer law
 * and the all-idle law as half the mean of |r - 1| with r the averaged
 * likelihood ratio under idle sampling.  Throws CostCapExceeded when
 * size * n * trials exceeds 1e11.
 */
TvEstimate mc_tv_estimate(const codec::Codebook& cb, std::size_t L,
                          const DmcPair& channel, std::int64_t trials,
                          std::uint64_t seed);
TvEstimate mc_tv_estimate(const codec::Codebook& cb, std::size_t L,
                          double sigma_w2, std::int64_t trials,
                          std::uint64_t seed);

struct WeightPartition {
  std::vector<std::uint32_t> low_rows;
  std::vector<std::uint32_t> high_rows;
  double threshold = 0.0;
  double low_fraction = 0.0;
  std::optional<codec::Codebook> low;
  std::optional<codec::Codebook> high;
};

/**
 * Splits codewords at the converse point: weight sqrt(2 n log L / chi2) for
 * discrete codebooks, squared norm sqrt(4 sigma_w2^2 n log L) for BPSK.
 */
WeightPartition weight_partition(const codec::Codebook& cb, std::size_t L,
                                 double chi2_or_sigma_w2);

struct DmcDetectionDiagnostics {
  double mu0 = 0.0;
  double sigma0_sq = 0.0;
  double mu1 = 0.0;
  double sigma1_sq = 0.0;
  double beta_chebyshev = 1.0;
};

/**
 * Moments of the weight statistic under idle and live symbols, plus the
 * Chebyshev missed-detection bound for a codeword of the given weight.
 * Reported for inspection only; not a pass/fail quantity.
 */
DmcDetectionDiagnostics dmc_detection_diagnostics(const DmcPair& channel,
                                                  std::size_t n, std::size_t L,
                                                  double epsilon,
                                                  double codeword_weight);

struct AwgnDetectionDiagnostics {
  double beta_chebyshev = 1.0;
};

AwgnDetectionDiagnostics awgn_detection_diagnostics(double sigma_w2,
                                                    std::size_t n,
                                                    std::size_t L,
                                                    double epsilon,
                                                    double codeword_power);

}  // namespace covertslot::detect
