#include "covertslot/distributions.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <json.hpp>

namespace covertslot {

namespace {

std::vector<double> json_to_probs(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidParameters("expected an array of probabilities");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidParameters("probability entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

nlohmann::json parse_object(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw InvalidParameters("malformed JSON object");
  return j;
}

void require_same_alphabet(const FiniteDistribution& p,
                           const FiniteDistribution& q) {
  if (p.size() != q.size())
    throw AlphabetMismatch("distributions are over different alphabets");
}

}  // namespace

FiniteDistribution::FiniteDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.size() < 2)
    throw InvalidParameters("alphabet must have at least two symbols");
  for (double p : probs_)
    if (!(p >= 0.0))
      throw InvalidParameters("probabilities must be nonnegative");
  double sum = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidParameters("probabilities must sum to 1 within 1e-12");
  for (double& p : probs_) p /= sum;
}

FiniteDistribution FiniteDistribution::from_json_text(std::string_view text) {
  nlohmann::json j = parse_object(text);
  if (!j.contains("probs"))
    throw InvalidParameters("missing \"probs\" field");
  return FiniteDistribution(json_to_probs(j["probs"]));
}

double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q) {
  require_same_alphabet(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0)
      throw AbsoluteContinuityViolation(
          "first argument is not absolutely continuous w.r.t. the second");
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q) {
  require_same_alphabet(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

double chi_squared(const FiniteDistribution& p, const FiniteDistribution& q) {
  require_same_alphabet(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double diff = p[i] - q[i];
    if (diff == 0.0) continue;
    if (q[i] == 0.0)
      throw AbsoluteContinuityViolation(
          "first argument is not absolutely continuous w.r.t. the second");
    sum += diff * diff / q[i];
  }
  return sum;
}

FiniteDistribution mixture(const FiniteDistribution& q0,
                           const FiniteDistribution& q1, double alpha) {
  require_same_alphabet(q0, q1);
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw OutOfRangeAlpha("mixture coefficient must lie in [0, 1]");
  std::vector<double> probs(q0.size());
  for (std::size_t i = 0; i < q0.size(); ++i)
    probs[i] = (1.0 - alpha) * q0[i] + alpha * q1[i];
  return FiniteDistribution(std::move(probs));
}

DmcPair::DmcPair(FiniteDistribution p0_in, FiniteDistribution p1_in,
                 FiniteDistribution q0_in, FiniteDistribution q1_in)
    : p0(std::move(p0_in)),
      p1(std::move(p1_in)),
      q0(std::move(q0_in)),
      q1(std::move(q1_in)) {
  require_same_alphabet(p0, p1);
  require_same_alphabet(q0, q1);
  for (std::size_t i = 0; i < p0.size(); ++i)
    if (p1[i] > 0.0 && p0[i] == 0.0)
      throw AbsoluteContinuityViolation(
          "receiver active law is not absolutely continuous w.r.t. idle law");
  for (std::size_t i = 0; i < q0.size(); ++i)
    if (q1[i] > 0.0 && q0[i] == 0.0)
      throw AbsoluteContinuityViolation(
          "observer active law is not absolutely continuous w.r.t. idle law");
  if (tv_distance(q0, q1) <= 1e-12)
    throw InvalidParameters("observer laws must be distinguishable");
}

DmcPair DmcPair::bsc(double receiver_flip, double observer_flip) {
  if (!(receiver_flip > 0.0 && receiver_flip < 1.0) ||
      !(observer_flip > 0.0 && observer_flip < 1.0))
    throw InvalidParameters("crossover probabilities must lie in (0, 1)");
  FiniteDistribution p0({1.0 - receiver_flip, receiver_flip});
  FiniteDistribution p1({receiver_flip, 1.0 - receiver_flip});
  FiniteDistribution q0({1.0 - observer_flip, observer_flip});
  FiniteDistribution q1({observer_flip, 1.0 - observer_flip});
  return DmcPair(std::move(p0), std::move(p1), std::move(q0), std::move(q1));
}

DmcPair DmcPair::from_json_text(std::string_view text) {
  nlohmann::json j = parse_object(text);
  for (const char* key : {"p0", "p1", "q0", "q1"})
    if (!j.contains(key))
      throw InvalidParameters(std::string("missing \"") + key + "\" field");
  return DmcPair(FiniteDistribution(json_to_probs(j["p0"])),
                 FiniteDistribution(json_to_probs(j["p1"])),
                 FiniteDistribution(json_to_probs(j["q0"])),
                 FiniteDistribution(json_to_probs(j["q1"])));
}

AwgnPair::AwgnPair(double sigma_b2_in, double sigma_w2_in)
    : sigma_b2(sigma_b2_in), sigma_w2(sigma_w2_in) {
  if (!(sigma_b2 > 0.0) || !(sigma_w2 > 0.0))
    throw NonPositiveVariance("noise variances must be positive");
}

AwgnPair AwgnPair::from_json_text(std::string_view text) {
  nlohmann::json j = parse_object(text);
  if (!j.contains("sigma_b2") || !j.contains("sigma_w2"))
    throw InvalidParameters("missing \"sigma_b2\" or \"sigma_w2\" field");
  if (!j["sigma_b2"].is_number() || !j["sigma_w2"].is_number())
    throw InvalidParameters("variances must be numbers");
  return AwgnPair(j["sigma_b2"].get<double>(), j["sigma_w2"].get<double>());
}

LlrWeight::LlrWeight(const FiniteDistribution& q1,
                     const FiniteDistribution& q0) {
  require_same_alphabet(q1, q0);
  values_.resize(q0.size());
  for (std::size_t z = 0; z < q0.size(); ++z) {
    double diff = q1[z] - q0[z];
    if (diff == 0.0) {
      values_[z] = 0.0;
      continue;
    }
    if (q0[z] == 0.0)
      throw AbsoluteContinuityViolation(
          "active law is not absolutely continuous w.r.t. idle law");
    values_[z] = diff / q0[z];
    chi2_ += diff * diff / q0[z];
  }
}

double gaussian_mixture_density(double z, double a, double sigma2) {
  if (!(sigma2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2);
  double em = std::exp(-(z + a) * (z + a) / (2.0 * sigma2));
  double ep = std::exp(-(z - a) * (z - a) / (2.0 * sigma2));
  return 0.5 * norm * (em + ep);
}

double gaussian_llr_weight(double z, double a, double sigma2) {
  if (!(sigma2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  double u = a * z / sigma2;
  double c = a * a / (2.0 * sigma2);
  // exp(-c) cosh(u) - 1, computed in pieces that cannot overflow for |u| < 700.
  return 0.5 * (std::exp(u - c) + std::exp(-u - c)) - 1.0;
}

}  // namespace covertslot
