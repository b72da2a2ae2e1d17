#include "covertslot/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace covertslot::bounds {

namespace {

constexpr double kLogOverflow = 700.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

/** log(e^y - 1) for y > 0 without overflow. */
double log_expm1(double y) {
  if (y > 36.0) return y + std::log1p(-std::exp(-y));
  return std::log(std::expm1(y));
}

void require_frame_shape(std::int64_t n, std::int64_t L) {
  if (n < 1 || L < 1) throw InvalidParameters("need n >= 1 and L >= 1");
}

SlotKlBound assemble(double exact_exponent, double exp_exponent,
                     std::int64_t L) {
  SlotKlBound out;
  double logL = std::log(static_cast<double>(L));
  out.log_exact_form = exact_exponent <= 0.0
                           ? -kInf
                           : log_expm1(exact_exponent) - logL;
  out.log_exp_form = exp_exponent - logL;
  out.overflow = exp_exponent > kLogOverflow;
  out.exact_form = exact_exponent > kLogOverflow
                       ? kInf
                       : std::expm1(exact_exponent) / static_cast<double>(L);
  out.exp_form = out.log_exp_form > kLogOverflow ? kInf
                                                 : std::exp(out.log_exp_form);
  return out;
}

}  // namespace

void AchievabilityParams::validate() const {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(delta) || !open_unit(nu1) || !open_unit(nu2) ||
      !open_unit(delta1) || !open_unit(delta2))
    throw InvalidParameters("delta and all slack parameters must lie in (0, 1)");
  if (!(epsilon > 1.0))
    throw InvalidParameters("detection level multiplier must exceed 1");
}

SlotKlBound dmc_slot_kl_bound(std::int64_t n, std::int64_t L, double alpha,
                              double chi2) {
  require_frame_shape(n, L);
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw OutOfRangeAlpha("bias must lie in [0, 1]");
  if (!(chi2 >= 0.0)) throw NonPositiveArgument("chi-squared must be >= 0");
  double s = alpha * alpha * chi2;
  return assemble(static_cast<double>(n) * std::log1p(s),
                  static_cast<double>(n) * s, L);
}

SlotKlBound awgn_slot_kl_bound(std::int64_t n, std::int64_t L, double rho,
                               double sigma_w2) {
  require_frame_shape(n, L);
  if (!(rho >= 0.0)) throw NonPositiveArgument("per-symbol power must be >= 0");
  if (!(sigma_w2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  double u = rho / sigma_w2;
  // log cosh(u), stable for large u.
  double log_cosh = u > 36.0 ? u - std::numbers::ln2_v<double>
                             : std::log(std::cosh(u));
  return assemble(static_cast<double>(n) * log_cosh,
                  static_cast<double>(n) * u * u / 2.0, L);
}

double covertness_budget(std::int64_t n, double delta) {
  if (n < 1) throw InvalidParameters("need n >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidParameters("delta must lie in (0, 1)");
  return 2.0 * delta * delta - 4.0 / std::sqrt(static_cast<double>(n));
}

namespace {

/** log(L * budget); throws when the frame cannot stay covert. */
double feasible_log_budget(std::int64_t n, std::int64_t L, double delta) {
  require_frame_shape(n, L);
  double budget = covertness_budget(n, delta);
  if (!(budget > 0.0))
    throw CovertnessInfeasible("covertness budget is not positive at this n");
  double arg = static_cast<double>(L) * budget;
  if (arg < 1.0)
    throw CovertnessInfeasible("slot count is too small for this budget");
  return std::log(arg);
}

}  // namespace

double choose_alpha_n(std::int64_t n, std::int64_t L, double delta,
                      double chi2) {
  if (!(chi2 > 0.0))
    throw NonPositiveArgument("chi-squared must be positive");
  double alpha =
      std::sqrt(feasible_log_budget(n, L, delta) / (static_cast<double>(n) * chi2));
  if (alpha >= 1.0)
    throw CovertnessInfeasible("selected bias reaches 1; scheme degenerates");
  return alpha;
}

double choose_rho_n(std::int64_t n, std::int64_t L, double delta,
                    double sigma_w2) {
  if (!(sigma_w2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  return std::sqrt(2.0 * sigma_w2 * sigma_w2 * feasible_log_budget(n, L, delta) /
                   static_cast<double>(n));
}

CapacityBounds dmc_capacity_bounds(const DmcPair& pair) {
  double d_receiver = kl_divergence(pair.p1, pair.p0);
  double d_observer = kl_divergence(pair.q1, pair.q0);
  if (!(d_receiver > d_observer))
    throw KeylessConditionViolated(
        "receiver divergence must exceed observer divergence");
  double chi2 = chi_squared(pair.q1, pair.q0);
  CapacityBounds out;
  out.lower = d_receiver / std::sqrt(chi2);
  out.upper = std::numbers::sqrt2_v<double> * out.lower;
  return out;
}

CapacityBounds awgn_capacity_bounds(const AwgnPair& pair) {
  if (!(pair.sigma_w2 > pair.sigma_b2))
    throw KeylessConditionViolated(
        "observer noise must exceed receiver noise");
  CapacityBounds out;
  out.lower = pair.sigma_w2 / (std::numbers::sqrt2_v<double> * pair.sigma_b2);
  out.upper = pair.sigma_w2 / pair.sigma_b2;
  return out;
}

double key_throughput(const DmcPair& pair) {
  double gap = kl_divergence(pair.q1, pair.q0) - kl_divergence(pair.p1, pair.p0);
  if (gap <= 0.0) return 0.0;
  return gap / std::sqrt(chi_squared(pair.q1, pair.q0));
}

InfoDensityMoments info_density_moments_dmc(const FiniteDistribution& x0_law,
                                            const FiniteDistribution& x1_law,
                                            double alpha,
                                            ReferenceKind reference) {
  if (x0_law.size() != x1_law.size())
    throw AlphabetMismatch("laws are over different alphabets");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw OutOfRangeAlpha("bias must lie in (0, 1)");
  for (std::size_t y = 0; y < x0_law.size(); ++y)
    if (x1_law[y] > 0.0 && x0_law[y] == 0.0)
      throw AbsoluteContinuityViolation(
          "live law is not absolutely continuous w.r.t. idle law");
  FiniteDistribution ref = reference == ReferenceKind::MixtureRef
                               ? mixture(x0_law, x1_law, alpha)
                               : x0_law;
  InfoDensityMoments out;
  const FiniteDistribution* laws[2] = {&x0_law, &x1_law};
  double weights[2] = {1.0 - alpha, alpha};
  for (int x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < x0_law.size(); ++y) {
      double w = (*laws[x])[y];
      if (w == 0.0) continue;
      double v = std::log(w / ref[y]);
      out.mean += weights[x] * w * v;
      out.second_moment += weights[x] * w * v * v;
      out.abs_max = std::max(out.abs_max, std::abs(v));
    }
  }
  return out;
}

double bernstein_tail(double t, double sum_second_moments, double b) {
  if (!(t > 0.0) || !(sum_second_moments > 0.0) || !(b > 0.0))
    throw NonPositiveArgument("tail arguments must be positive");
  return std::exp(-t * t / (2.0 * (sum_second_moments + b * t / 3.0)));
}

double gaussian_sum_tail(double t, double sum_variances) {
  if (!(t > 0.0) || !(sum_variances > 0.0))
    throw NonPositiveArgument("tail arguments must be positive");
  return std::exp(-t * t / (2.0 * sum_variances));
}

double chi_square_upper_tail(std::int64_t n, double sigma2, double c) {
  if (n < 1) throw InvalidParameters("need n >= 1");
  if (!(sigma2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  if (!(c > 0.0 && c < static_cast<double>(n) * sigma2))
    throw RangeViolation("excess must lie in (0, n sigma2)");
  return std::exp(-static_cast<double>(n) * c * c /
                  (4.0 * sigma2 * sigma2 + 4.0 * sigma2 * c));
}

LogDomainPair awgn_change_of_measure_penalty(std::int64_t n, double rho,
                                             double sigma_b2) {
  if (n < 1) throw InvalidParameters("need n >= 1");
  if (!(rho >= 0.0)) throw NonPositiveArgument("per-symbol power must be >= 0");
  if (!(sigma_b2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  double u = rho / sigma_b2;
  LogDomainPair out;
  out.exact = static_cast<double>(n) *
              (u > 36.0 ? u - std::numbers::ln2_v<double> : std::log(std::cosh(u)));
  out.bound = static_cast<double>(n) * u * u / 2.0;
  return out;
}

double dmc_weight_threshold(std::int64_t n, std::int64_t L, double chi2) {
  require_frame_shape(n, L);
  if (!(chi2 > 0.0)) throw NonPositiveArgument("chi-squared must be positive");
  return std::sqrt(2.0 * static_cast<double>(n) *
                   std::log(static_cast<double>(L)) / chi2);
}

double awgn_power_threshold(std::int64_t n, std::int64_t L, double sigma_w2) {
  require_frame_shape(n, L);
  if (!(sigma_w2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  return std::sqrt(4.0 * sigma_w2 * sigma_w2 * static_cast<double>(n) *
                   std::log(static_cast<double>(L)));
}

namespace {

void require_test_shape(std::int64_t n, std::int64_t L, double epsilon) {
  if (n < 1) throw InvalidParameters("need n >= 1");
  if (L < 2) throw InvalidParameters("need L >= 2");
  if (!(epsilon > 1.0)) throw InvalidParameters("epsilon must exceed 1");
}

}  // namespace

double dmc_detection_tau(std::int64_t n, std::int64_t L, double epsilon,
                         double chi2) {
  require_test_shape(n, L, epsilon);
  if (!(chi2 > 0.0)) throw NonPositiveArgument("chi-squared must be positive");
  return epsilon * std::sqrt(2.0 * chi2 * std::log(static_cast<double>(L)) /
                             static_cast<double>(n));
}

double awgn_detection_tau(std::int64_t n, std::int64_t L, double epsilon,
                          double sigma_w2) {
  require_test_shape(n, L, epsilon);
  if (!(sigma_w2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  return epsilon * std::sqrt(4.0 * sigma_w2 * sigma_w2 *
                             std::log(static_cast<double>(L)) /
                             static_cast<double>(n));
}

}  // namespace covertslot::bounds
