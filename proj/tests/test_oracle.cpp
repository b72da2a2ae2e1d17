#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "covertslot/bounds.hpp"
#include "covertslot/codec.hpp"
#include "covertslot/exact.hpp"

using namespace covertslot;
using namespace covertslot::exact;

namespace {

DmcPair desk_pair() { return DmcPair::bsc(0.05, 0.1); }

double table_sum(const std::vector<double>& law) {
  return std::accumulate(law.begin(), law.end(), 0.0);
}

codec::Codebook fixed_codebook(std::size_t n,
                               std::vector<std::uint8_t> bits) {
  std::size_t rows = bits.size() / n;
  return codec::Codebook(codec::CodebookKind::DmcBernoulli, rows, n, 0.5, 0,
                         std::move(bits));
}

}  // namespace

TEST_CASE("instance construction enforces the enumeration caps") {
  DmcPair pair = desk_pair();
  CHECK_NOTHROW(ExactInstance(2, 2, pair, 0.5));
  CHECK_NOTHROW(ExactInstance(13, 2, pair, 0.5));
  CHECK_THROWS_AS(ExactInstance(9, 3, pair, 0.5), TooLargeToEnumerate);
  CHECK_THROWS_AS(ExactInstance(14, 2, pair, 0.5), TooLargeToEnumerate);
  CHECK_THROWS_AS(ExactInstance(0, 2, pair, 0.5), InvalidParameters);
  CHECK_THROWS_AS(ExactInstance(2, 2, pair, 1.5), OutOfRangeAlpha);

  codec::Codebook cb = fixed_codebook(3, {1, 0, 1});
  CHECK_THROWS_AS(ExactInstance(2, 2, pair, 0.5, cb), LengthMismatch);
}

TEST_CASE("product law enumerates iid sequences") {
  FiniteDistribution q0({0.9, 0.1});
  std::vector<double> law = product_law(q0, 2);
  REQUIRE(law.size() == 4);
  CHECK(law[0] == doctest::Approx(0.81).epsilon(1e-14));
  CHECK(law[1] == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(law[2] == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(law[3] == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(table_sum(law) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("slot mixture law matches the hand table") {
  ExactInstance inst(1, 2, desk_pair(), 0.5);
  std::vector<double> law = exact_mixture_law(inst);
  REQUIRE(law.size() == 4);
  CHECK(law[0] == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(law[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(law[2] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(law[3] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(table_sum(law) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("slot mixture reductions") {
  DmcPair pair = desk_pair();

  ExactInstance idle(2, 3, pair, 0.0);
  std::vector<double> idle_law = exact_mixture_law(idle);
  std::vector<double> all_idle = product_law(pair.q0, 6);
  CHECK(exact_kl(idle_law, all_idle) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(exact_tv(idle_law, all_idle) == doctest::Approx(0.0).epsilon(1e-12));

  ExactInstance single(3, 1, pair, 0.4);
  std::vector<double> single_law = exact_mixture_law(single);
  std::vector<double> direct = product_law(mixture(pair.q0, pair.q1, 0.4), 3);
  REQUIRE(single_law.size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(single_law[i] == doctest::Approx(direct[i]).epsilon(1e-12));
}

TEST_CASE("mixture law divergence stays below the closed form bound") {
  ExactInstance inst(2, 2, desk_pair(), 0.5);
  std::vector<double> mixture_law = exact_mixture_law(inst);
  std::vector<double> idle = product_law(inst.channel.q0, 4);
  double kl = exact_kl(mixture_law, idle);
  CHECK(kl == doctest::Approx(0.709025463800947).epsilon(1e-12));
  double chi2 = chi_squared(inst.channel.q1, inst.channel.q0);
  bounds::SlotKlBound bound = bounds::dmc_slot_kl_bound(2, 2, 0.5, chi2);
  CHECK(bound.exact_form == doctest::Approx(3.3580246913580245).epsilon(1e-13));
  CHECK(kl <= bound.exact_form);

  double tv = exact_tv(mixture_law, idle);
  CHECK(kl + 1e-12 >= 2.0 * tv * tv);
}

TEST_CASE("codebook induced law") {
  DmcPair pair = desk_pair();

  ExactInstance live(1, 2, pair, 0.5, fixed_codebook(1, {1}));
  std::vector<double> law = exact_induced_law(live);
  REQUIRE(law.size() == 4);
  CHECK(law[0] == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(law[1] == doctest::Approx(0.41).epsilon(1e-14));
  CHECK(law[2] == doctest::Approx(0.41).epsilon(1e-14));
  CHECK(law[3] == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(table_sum(law) == doctest::Approx(1.0).epsilon(1e-10));

  ExactInstance silent(2, 2, pair, 0.5, fixed_codebook(2, {0, 0}));
  std::vector<double> silent_law = exact_induced_law(silent);
  std::vector<double> idle = product_law(pair.q0, 4);
  for (std::size_t i = 0; i < idle.size(); ++i)
    CHECK(silent_law[i] == doctest::Approx(idle[i]).epsilon(1e-12));

  ExactInstance bare(2, 2, pair, 0.5);
  CHECK_THROWS_AS(exact_induced_law(bare), InvalidParameters);
}

TEST_CASE("table divergences validate their inputs") {
  std::vector<double> p = {0.5, 0.5};
  std::vector<double> q = {0.25, 0.25, 0.25, 0.25};
  CHECK_THROWS_AS(exact_kl(p, q), KeyMismatch);
  CHECK_THROWS_AS(exact_tv(p, q), KeyMismatch);

  std::vector<double> spike = {1.0, 0.0};
  std::vector<double> half = {0.5, 0.5};
  CHECK(exact_kl(spike, half) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(exact_kl(half, spike), AbsoluteContinuityViolation);
  CHECK(exact_tv(spike, half) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("table csv layout") {
  std::string csv = table_csv({0.25, 0.75});
  CHECK(csv.rfind("sequence_index,probability\r\n", 0) == 0);
  CHECK(csv.find("0,0.25\r\n") != std::string::npos);
  CHECK(csv.find("1,0.75\r\n") != std::string::npos);
  std::string precise = table_csv({1.0 / 3.0, 2.0 / 3.0});
  CHECK(precise.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("gaussian frame divergence estimator") {
  McEstimate zero = mc_kl_awgn(2, 2, 0.0, 1.0, 10000, 5);
  CHECK(zero.estimate == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(zero.std_error == doctest::Approx(0.0).epsilon(1e-12));

  McEstimate est = mc_kl_awgn(2, 2, 0.5, 1.0, 20000, 5);
  double cosh_form = bounds::awgn_slot_kl_bound(2, 2, 0.5, 1.0).exact_form;
  CHECK(est.estimate <= cosh_form + 3.0 * est.std_error);
  CHECK(est.estimate > 0.0);
  CHECK(est.std_error > 0.0);

  McEstimate rerun = mc_kl_awgn(2, 2, 0.5, 1.0, 20000, 5);
  CHECK(rerun.estimate == est.estimate);
  CHECK(rerun.std_error == est.std_error);
  McEstimate other = mc_kl_awgn(2, 2, 0.5, 1.0, 20000, 6);
  CHECK(other.estimate != est.estimate);

  CHECK_THROWS_AS(mc_kl_awgn(2, 2, 0.5, 1.0, 9999, 5), NonPositiveTrials);
  CHECK_THROWS_AS(mc_kl_awgn(2, 2, -0.5, 1.0, 10000, 5), NonPositiveArgument);
  CHECK_THROWS_AS(mc_kl_awgn(2, 2, 0.5, 0.0, 10000, 5), NonPositiveVariance);
}
