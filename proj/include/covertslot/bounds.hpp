/**
 * Closed-form quantities for the slotted covert scheme: per-frame divergence
 * bounds, feasible signal amplitudes, throughput bounds and their targets,
 * information-density moments for the receiver, concentration tails, and the
 * detection-test thresholds.  All logarithms are natural.
 */
#pragma once

#include <cstdint>

#include "covertslot/distributions.hpp"

namespace covertslot::bounds {

/** Covertness level and slack knobs; validate() enforces the open ranges. */
struct AchievabilityParams {
  double delta = 0.5;
  double nu1 = 0.25;
  double nu2 = 0.25;
  double delta1 = 0.25;
  double delta2 = 0.25;
  double epsilon = 1.2;

  void validate() const;

  /** Fraction of the single-slot rate retained after both slacks. */
  double size_factor() const { return (1.0 - delta1) * (1.0 - nu1); }
};

/**
 * Upper bounds on the divergence between the L-slot frame law with a live
 * slot and the all-idle law.  exact_form is ((1 + s)^n - 1) / L for the
 * per-symbol chi-squared term s; exp_form replaces (1 + s)^n by e^{n s}.
 * Both are also reported as natural logs; when the exponent passes 700 the
 * linear fields are +infinity and overflow is set.
 */
struct SlotKlBound {
  double exact_form = 0.0;
  double exp_form = 0.0;
  double log_exact_form = 0.0;
  double log_exp_form = 0.0;
  bool overflow = false;
};

SlotKlBound dmc_slot_kl_bound(std::int64_t n, std::int64_t L, double alpha,
                              double chi2);
SlotKlBound awgn_slot_kl_bound(std::int64_t n, std::int64_t L, double rho,
                               double sigma_w2);

/** 2 delta^2 - 4 / sqrt(n); positive iff covertness is attainable at this n. */
double covertness_budget(std::int64_t n, double delta);

/**
 * Largest live-slot bias keeping the frame divergence within the budget:
 * sqrt(log(L (2 delta^2 - 4/sqrt(n))) / (n chi2)).  Throws
 * CovertnessInfeasible when the budget or the logarithm argument is too
 * small, or when the result reaches 1.
 */
double choose_alpha_n(std::int64_t n, std::int64_t L, double delta,
                      double chi2);

/** Gaussian analogue: sqrt(2 sigma_w2^2 log(L (2 delta^2 - 4/sqrt(n))) / n). */
double choose_rho_n(std::int64_t n, std::int64_t L, double delta,
                    double sigma_w2);

struct CapacityBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/**
 * Bounds on the covert throughput scaling log M / sqrt(n log L).
 * Discrete case: lower kl(p1||p0)/sqrt(chi2), upper sqrt(2) times that;
 * requires kl(p1||p0) > kl(q1||q0), else KeylessConditionViolated.
 */
CapacityBounds dmc_capacity_bounds(const DmcPair& pair);

/** Gaussian case: lower sigma_w2/(sqrt(2) sigma_b2), upper sigma_w2/sigma_b2. */
CapacityBounds awgn_capacity_bounds(const AwgnPair& pair);

/** Extra throughput unlocked by a shared key: (kl(q1||q0) - kl(p1||p0))^+ / sqrt(chi2). */
double key_throughput(const DmcPair& pair);

/** Reference law the decoder tests against: the idle/live mixture or idle only. */
enum class ReferenceKind { MixtureRef, PureRef };

struct InfoDensityMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double abs_max = 0.0;
};

/**
 * Moments of log(W(y|x)/R(y)) with x drawn with live probability alpha and y
 * from the corresponding receiver law; R is the alpha-mixture (MixtureRef)
 * or the idle law (PureRef).  Requires x1_law << x0_law and alpha in (0, 1).
 */
InfoDensityMoments info_density_moments_dmc(const FiniteDistribution& x0_law,
                                            const FiniteDistribution& x1_law,
                                            double alpha,
                                            ReferenceKind reference);

/** P(S >= t) bound exp(-t^2 / (2 (V + b t / 3))) for |X_i| <= b, sum of second moments V. */
double bernstein_tail(double t, double sum_second_moments, double b);

/** Gaussian tail bound exp(-t^2 / (2 V)) for a centered normal sum with variance V. */
double gaussian_sum_tail(double t, double sum_variances);

/**
 * P((1/n) sum of n squared N(0, sigma2) draws exceeds sigma2 + c) is at most
 * exp(-n c^2 / (4 sigma2^2 + 4 sigma2 c)); requires 0 < c < n sigma2.
 */
double chi_square_upper_tail(std::int64_t n, double sigma2, double c);

struct LogDomainPair {
  double exact = 0.0;
  double bound = 0.0;
};

/**
 * Log-domain size of the change of measure from the live BPSK law to the
 * idle law over n uses: exact n log cosh(rho / sigma_b2) and its quadratic
 * upper bound n rho^2 / (2 sigma_b2^2).
 */
LogDomainPair awgn_change_of_measure_penalty(std::int64_t n, double rho,
                                             double sigma_b2);

/** Codeword-weight split point sqrt(2 n log L / chi2) for the discrete converse. */
double dmc_weight_threshold(std::int64_t n, std::int64_t L, double chi2);

/** Codeword-power split point sqrt(4 sigma_w2^2 n log L) for the Gaussian converse. */
double awgn_power_threshold(std::int64_t n, std::int64_t L, double sigma_w2);

/** Detection-test level epsilon sqrt(2 chi2 log L / n); requires epsilon > 1, L >= 2. */
double dmc_detection_tau(std::int64_t n, std::int64_t L, double epsilon,
                         double chi2);

/** Gaussian analogue epsilon sqrt(4 sigma_w2^2 log L / n). */
double awgn_detection_tau(std::int64_t n, std::int64_t L, double epsilon,
                          double sigma_w2);

}  // namespace covertslot::bounds
