#include "covertslot/exact.hpp"

#include <cmath>
#include <cstdio>

#include "covertslot/rng.hpp"

namespace covertslot::exact {

namespace {

constexpr double kMaxTableSize = 1e8;
constexpr std::size_t kMaxTotalLen = 26;

/** Odometer over output sequences; digits[0] is the most significant. */
struct SequenceIter {
  std::vector<std::size_t> digits;
  std::size_t radix;

  explicit SequenceIter(std::size_t len, std::size_t radix_in)
      : digits(len, 0), radix(radix_in) {}

  bool advance() {
    for (std::size_t k = digits.size(); k-- > 0;) {
      if (++digits[k] < radix) return true;
      digits[k] = 0;
    }
    return false;
  }
};

}  // namespace

ExactInstance::ExactInstance(std::size_t n_in, std::size_t L_in,
                             DmcPair channel_in, double alpha_in,
                             std::optional<codec::Codebook> codebook_in)
    : n(n_in), L(L_in), channel(std::move(channel_in)), alpha(alpha_in),
      codebook(std::move(codebook_in)) {
  if (n < 1 || L < 1) throw InvalidParameters("need n >= 1 and L >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw OutOfRangeAlpha("bias must lie in [0, 1]");
  if (total_len() > kMaxTotalLen)
    throw TooLargeToEnumerate("frame length exceeds the enumeration cap");
  double size = std::pow(static_cast<double>(alphabet()),
                         static_cast<double>(total_len()));
  if (size > kMaxTableSize)
    throw TooLargeToEnumerate("output table exceeds the enumeration cap");
  if (codebook && codebook->n() != n)
    throw LengthMismatch("codebook length does not match the slot length");
}

std::size_t ExactInstance::table_size() const {
  std::size_t size = 1;
  for (std::size_t i = 0; i < total_len(); ++i) size *= alphabet();
  return size;
}

std::vector<double> product_law(const FiniteDistribution& base,
                                std::size_t len) {
  if (len < 1) throw InvalidParameters("need len >= 1");
  double entries = std::pow(static_cast<double>(base.size()),
                            static_cast<double>(len));
  if (len > kMaxTotalLen || entries > kMaxTableSize)
    throw TooLargeToEnumerate("output table exceeds the enumeration cap");
  std::size_t size = 1;
  for (std::size_t i = 0; i < len; ++i) size *= base.size();
  std::vector<double> law(size);
  SequenceIter it(len, base.size());
  std::size_t idx = 0;
  do {
    double p = 1.0;
    for (std::size_t digit : it.digits) p *= base[digit];
    law[idx++] = p;
  } while (it.advance());
  return law;
}

std::vector<double> exact_mixture_law(const ExactInstance& instance) {
  FiniteDistribution live =
      mixture(instance.channel.q0, instance.channel.q1, instance.alpha);
  const FiniteDistribution& idle = instance.channel.q0;
  std::vector<double> law(instance.table_size());
  std::vector<double> idle_slot(instance.L), live_slot(instance.L);
  SequenceIter it(instance.total_len(), instance.alphabet());
  std::size_t idx = 0;
  do {
    for (std::size_t t = 0; t < instance.L; ++t) {
      double pi = 1.0, pl = 1.0;
      for (std::size_t i = 0; i < instance.n; ++i) {
        std::size_t z = it.digits[t * instance.n + i];
        pi *= idle[z];
        pl *= live[z];
      }
      idle_slot[t] = pi;
      live_slot[t] = pl;
    }
    double total = 0.0;
    for (std::size_t t = 0; t < instance.L; ++t) {
      double term = live_slot[t];
      for (std::size_t ell = 0; ell < instance.L; ++ell)
        if (ell != t) term *= idle_slot[ell];
      total += term;
    }
    law[idx++] = total / static_cast<double>(instance.L);
  } while (it.advance());
  return law;
}

std::vector<double> exact_induced_law(const ExactInstance& instance) {
  if (!instance.codebook)
    throw InvalidParameters("instance carries no codebook");
  const codec::Codebook& cb = *instance.codebook;
  const FiniteDistribution& idle = instance.channel.q0;
  const FiniteDistribution& liveq = instance.channel.q1;
  std::vector<double> law(instance.table_size());
  std::vector<double> idle_slot(instance.L), coded_slot(instance.L);
  SequenceIter it(instance.total_len(), instance.alphabet());
  std::size_t idx = 0;
  do {
    for (std::size_t t = 0; t < instance.L; ++t) {
      double pi = 1.0;
      for (std::size_t i = 0; i < instance.n; ++i)
        pi *= idle[it.digits[t * instance.n + i]];
      idle_slot[t] = pi;
      double avg = 0.0;
      for (std::size_t w = 0; w < cb.size(); ++w) {
        double pw = 1.0;
        for (std::size_t i = 0; i < instance.n; ++i) {
          std::size_t z = it.digits[t * instance.n + i];
          pw *= cb.bit(w, i) ? liveq[z] : idle[z];
        }
        avg += pw;
      }
      coded_slot[t] = avg / static_cast<double>(cb.size());
    }
    double total = 0.0;
    for (std::size_t t = 0; t < instance.L; ++t) {
      double term = coded_slot[t];
      for (std::size_t ell = 0; ell < instance.L; ++ell)
        if (ell != t) term *= idle_slot[ell];
      total += term;
    }
    law[idx++] = total / static_cast<double>(instance.L);
  } while (it.advance());
  return law;
}

double exact_kl(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw KeyMismatch("tables enumerate different sequence sets");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0)
      throw AbsoluteContinuityViolation(
          "first table is not absolutely continuous w.r.t. the second");
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

double exact_tv(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw KeyMismatch("tables enumerate different sequence sets");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

std::string table_csv(const std::vector<double>& law) {
  std::string out = "sequence_index,probability\r\n";
  char buf[64];
  for (std::size_t i = 0; i < law.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\r\n", i, law[i]);
    out += buf;
  }
  return out;
}

McEstimate mc_kl_awgn(std::size_t n, std::size_t L, double rho,
                      double sigma_w2, std::int64_t trials,
                      std::uint64_t seed) {
  if (n < 1 || L < 1) throw InvalidParameters("need n >= 1 and L >= 1");
  if (!(rho >= 0.0)) throw NonPositiveArgument("per-symbol power must be >= 0");
  if (!(sigma_w2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  if (trials < 10000)
    throw NonPositiveTrials("importance sampling needs at least 10000 trials");
  double a = std::sqrt(rho);
  double sd = std::sqrt(sigma_w2);
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> z(n * L);
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    rng::Stream stream(rng::derive(seed, rng::Role::McSample, trial));
    std::size_t live = static_cast<std::size_t>(stream.uniform_int(L));
    for (std::size_t t = 0; t < L; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        double x = 0.0;
        if (t == live) x = stream.uniform() < 0.5 ? a : -a;
        z[t * n + i] = x + sd * stream.normal();
      }
    }
    double ratio_sum = 0.0;
    for (std::size_t t = 0; t < L; ++t) {
      double prod = 1.0;
      for (std::size_t i = 0; i < n; ++i)
        prod *= 1.0 + gaussian_llr_weight(z[t * n + i], a, sigma_w2);
      ratio_sum += prod;
    }
    double value = std::log(ratio_sum / static_cast<double>(L));
    sum += value;
    sum_sq += value * value;
  }
  double mean = sum / static_cast<double>(trials);
  double var = std::max(0.0, sum_sq / static_cast<double>(trials) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(trials))};
}

}  // namespace covertslot::exact
