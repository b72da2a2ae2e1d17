/**
 * Probability primitives: finite distributions over a shared alphabet,
 * channel pairs for the two observers, divergences (KL, total variation,
 * chi-squared), slot mixtures, and the centered likelihood-ratio weight
 * used by the detection statistics.  KL values are in nats.
 */
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "covertslot/errors.hpp"

namespace covertslot {

class FiniteDistribution {
 public:
  /**
   * Entries must be nonnegative and sum to 1 within 1e-12; the stored vector
   * is renormalized to sum exactly to 1.  At least two symbols are required.
   */
  explicit FiniteDistribution(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

  bool operator==(const FiniteDistribution&) const = default;

  /** Parses {"probs": [...]} */
  static FiniteDistribution from_json_text(std::string_view text);

 private:
  std::vector<double> probs_;
};

double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q);
double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q);
double chi_squared(const FiniteDistribution& p, const FiniteDistribution& q);

/** (1-alpha) q0 + alpha q1; alpha must lie in [0, 1]. */
FiniteDistribution mixture(const FiniteDistribution& q0,
                           const FiniteDistribution& q1, double alpha);

/**
 * Output laws of a binary-input channel as seen by the intended receiver
 * (p0, p1) and the observer (q0, q1), indexed by the channel input.
 * Requires p1 absolutely continuous w.r.t. p0, q1 w.r.t. q0, and the
 * observer laws must be distinguishable (tv(q0, q1) > 1e-12).
 */
struct DmcPair {
  FiniteDistribution p0, p1, q0, q1;

  DmcPair(FiniteDistribution p0_in, FiniteDistribution p1_in,
          FiniteDistribution q0_in, FiniteDistribution q1_in);

  static DmcPair bsc(double receiver_flip, double observer_flip);

  /** Parses {"p0": [...], "p1": [...], "q0": [...], "q1": [...]} */
  static DmcPair from_json_text(std::string_view text);
};

/** Noise variances of the two Gaussian channels; both must be positive. */
struct AwgnPair {
  double sigma_b2 = 0.0;
  double sigma_w2 = 0.0;

  AwgnPair(double sigma_b2_in, double sigma_w2_in);

  /** Parses {"sigma_b2": ..., "sigma_w2": ...} */
  static AwgnPair from_json_text(std::string_view text);
};

/**
 * Per-symbol centered weight (q1(z) - q0(z)) / q0(z).  Mean zero under q0;
 * its second moment under q0 equals chi_squared(q1, q0).
 */
class LlrWeight {
 public:
  LlrWeight(const FiniteDistribution& q1, const FiniteDistribution& q0);

  double operator[](std::size_t z) const { return values_[z]; }
  const std::vector<double>& values() const { return values_; }
  double chi2() const { return chi2_; }

 private:
  std::vector<double> values_;
  double chi2_ = 0.0;
};

/** Density of (1/2) N(-a, sigma2) + (1/2) N(a, sigma2) at z. */
double gaussian_mixture_density(double z, double a, double sigma2);

/**
 * Centered weight of the symmetric Gaussian mixture against N(0, sigma2):
 * exp(-a^2 / (2 sigma2)) cosh(a z / sigma2) - 1.
 */
double gaussian_llr_weight(double z, double a, double sigma2);

}  // namespace covertslot
