#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "covertslot/codec.hpp"
#include "covertslot/distributions.hpp"
#include "covertslot/rng.hpp"

using namespace covertslot;
using namespace covertslot::codec;
using namespace covertslot::rng;

namespace {

std::filesystem::path temp_path(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

double idle_log_density(double z, double sigma2) {
  return -z * z / (2.0 * sigma2) -
         0.5 * std::log(2.0 * std::numbers::pi * sigma2);
}

/** Per-slot information density computed directly from the density ratios. */
double naive_dmc_density(std::span<const std::uint8_t> slot,
                         std::span<const std::uint8_t> codeword,
                         const FiniteDistribution& x0_law,
                         const FiniteDistribution& x1_law, double alpha,
                         bounds::ReferenceKind reference) {
  FiniteDistribution ref = reference == bounds::ReferenceKind::MixtureRef
                               ? mixture(x0_law, x1_law, alpha)
                               : x0_law;
  double sum = 0.0;
  for (std::size_t i = 0; i < slot.size(); ++i) {
    const FiniteDistribution& law = codeword[i] ? x1_law : x0_law;
    sum += std::log(law[slot[i]] / ref[slot[i]]);
  }
  return sum;
}

double naive_awgn_density(std::span<const double> slot,
                          std::span<const double> bpsk_codeword,
                          double amplitude, double sigma_b2,
                          bounds::ReferenceKind reference) {
  double sum = 0.0;
  for (std::size_t i = 0; i < slot.size(); ++i) {
    double signal = idle_log_density(slot[i] - bpsk_codeword[i], sigma_b2);
    double ref = reference == bounds::ReferenceKind::MixtureRef
                     ? std::log(gaussian_mixture_density(slot[i], amplitude,
                                                         sigma_b2))
                     : idle_log_density(slot[i], sigma_b2);
    sum += signal - ref;
  }
  return sum;
}

/** Midpoints between sorted distinct densities, plus points beyond each end. */
std::vector<double> probe_thresholds(std::vector<double> densities) {
  std::sort(densities.begin(), densities.end());
  std::vector<double> out;
  out.push_back(densities.front() - 1.0);
  for (std::size_t i = 0; i + 1 < densities.size(); ++i)
    if (densities[i + 1] - densities[i] > 1e-6)
      out.push_back(0.5 * (densities[i] + densities[i + 1]));
  out.push_back(densities.back() + 1.0);
  return out;
}

}  // namespace

TEST_CASE("codebook accessors and validation") {
  Codebook cb(CodebookKind::DmcBernoulli, 2, 3, 0.5, 9, {1, 0, 1, 0, 0, 0});
  CHECK(cb.size() == 2);
  CHECK(cb.n() == 3);
  CHECK(cb.bit(0, 2) == 1);
  CHECK(cb.weight(0) == 2);
  CHECK(cb.weight(1) == 0);
  CHECK(cb.seed() == 9);
  CHECK_THROWS_AS(cb.amplitude(), InvalidParameters);
  CHECK_THROWS_AS(cb.power(0), InvalidParameters);

  Codebook bpsk(CodebookKind::Bpsk, 1, 3, 2.0, 9, {1, 0, 1});
  CHECK(bpsk.amplitude() == 2.0);
  CHECK(bpsk.power(0) == doctest::Approx(12.0).epsilon(1e-15));
  std::vector<double> row = bpsk.bpsk_row(0);
  CHECK(row[0] == 2.0);
  CHECK(row[1] == -2.0);

  CHECK_THROWS_AS(Codebook(CodebookKind::DmcBernoulli, 2, 3, 0.5, 9, {1, 0}),
                  LengthMismatch);
  CHECK_THROWS_AS(Codebook(CodebookKind::DmcBernoulli, 1, 2, 0.5, 9, {2, 0}),
                  InvalidParameters);
  CHECK_THROWS_AS(Codebook(CodebookKind::Bpsk, 1, 2, 0.0, 9, {1, 0}),
                  InvalidParameters);
}

TEST_CASE("codebook subset") {
  Codebook cb(CodebookKind::DmcBernoulli, 3, 2, 0.4, 7, {1, 1, 0, 1, 0, 0});
  Codebook sub = cb.subset({2, 0});
  CHECK(sub.size() == 2);
  CHECK(sub.bit(0, 0) == 0);
  CHECK(sub.bit(1, 0) == 1);
  CHECK(sub.param() == 0.4);
  CHECK(sub.seed() == 7);
  CHECK_THROWS_AS(cb.subset({3}), RangeViolation);
  CHECK_THROWS_AS(cb.subset({}), InvalidParameters);
}

TEST_CASE("generated codebooks are deterministic per row") {
  Codebook a = generate_codebook(CodebookKind::DmcBernoulli, 4, 16, 0.3, 42);
  Codebook b = generate_codebook(CodebookKind::DmcBernoulli, 4, 16, 0.3, 42);
  CHECK(a.bits() == b.bits());

  Codebook wider = generate_codebook(CodebookKind::DmcBernoulli, 8, 16, 0.3, 42);
  for (std::size_t w = 0; w < 4; ++w)
    CHECK(std::equal(a.row(w).begin(), a.row(w).end(), wider.row(w).begin()));

  Codebook other = generate_codebook(CodebookKind::DmcBernoulli, 4, 16, 0.3, 43);
  CHECK(a.bits() != other.bits());

  CHECK_THROWS_AS(generate_codebook(CodebookKind::DmcBernoulli, 4, 16, 1.0, 1),
                  InvalidParameters);
  CHECK_THROWS_AS(generate_codebook(CodebookKind::Bpsk, 0, 16, 1.0, 1),
                  InvalidParameters);
}

TEST_CASE("generated bit frequencies match the bias") {
  const std::size_t rows = 100;
  const std::size_t n = 1000;
  for (double bias : {0.3, 0.5}) {
    CodebookKind kind =
        bias == 0.5 ? CodebookKind::Bpsk : CodebookKind::DmcBernoulli;
    double param = kind == CodebookKind::Bpsk ? 1.0 : bias;
    Codebook cb = generate_codebook(kind, rows, n, param, 1234);
    double ones = 0.0;
    for (std::uint8_t b : cb.bits()) ones += b;
    double freq = ones / static_cast<double>(rows * n);
    double sd = std::sqrt(bias * (1.0 - bias) / static_cast<double>(rows * n));
    CHECK(std::abs(freq - bias) <= 5.0 * sd);
  }
}

TEST_CASE("constant weight codebooks") {
  Codebook cb = constant_weight_codebook(20, 15, 6, 77);
  for (std::size_t w = 0; w < cb.size(); ++w) CHECK(cb.weight(w) == 6);

  Codebook again = constant_weight_codebook(20, 15, 6, 77);
  CHECK(cb.bits() == again.bits());

  CHECK(constant_weight_codebook(3, 4, 4, 1).weight(0) == 4);
  CHECK(constant_weight_codebook(3, 4, 0, 1).weight(2) == 0);
  CHECK_THROWS_AS(constant_weight_codebook(3, 4, 5, 1), InvalidParameters);
}

TEST_CASE("codebook file round trip") {
  std::filesystem::path path = temp_path("covertslot_cb_test.bin");

  Codebook cb = generate_codebook(CodebookKind::DmcBernoulli, 5, 13, 0.25, 99);
  save_codebook(cb, path);
  Codebook loaded = load_codebook(path);
  CHECK(loaded.kind() == cb.kind());
  CHECK(loaded.size() == cb.size());
  CHECK(loaded.n() == cb.n());
  CHECK(loaded.seed() == cb.seed());
  CHECK(loaded.bits() == cb.bits());

  std::uintmax_t expected = 22 + (5 * 13 + 7) / 8;
  CHECK(std::filesystem::file_size(path) == expected);

  Codebook bpsk = generate_codebook(CodebookKind::Bpsk, 3, 8, 1.75, 5);
  save_codebook(bpsk, path);
  Codebook bpsk_loaded = load_codebook(path);
  CHECK(bpsk_loaded.amplitude() == 1.75);
  CHECK(bpsk_loaded.bits() == bpsk.bits());
  CHECK(std::filesystem::file_size(path) == 30 + (3 * 8 + 7) / 8);

  std::fstream damage(path, std::ios::in | std::ios::out | std::ios::binary);
  damage.put('X');
  damage.close();
  CHECK_THROWS_AS(load_codebook(path), IoError);

  CHECK_THROWS_AS(load_codebook(temp_path("covertslot_no_such_file.bin")),
                  IoError);
  std::filesystem::remove(path);
}

TEST_CASE("frame embedding") {
  std::vector<std::uint8_t> word = {1, 0, 1};
  DmcFrame frame = embed_in_slot(std::span<const std::uint8_t>(word), 2, 3);
  CHECK(frame.n == 3);
  CHECK(frame.L == 3);
  CHECK(frame.slot == 2);
  REQUIRE(frame.symbols.size() == 9);
  CHECK(frame.symbols[3] == 1);
  CHECK(frame.symbols[4] == 0);
  CHECK(frame.symbols[5] == 1);
  CHECK(frame.symbols[0] == 0);
  CHECK(frame.symbols[8] == 0);

  CHECK_THROWS_AS(embed_in_slot(std::span<const std::uint8_t>(word), 0, 3),
                  SlotOutOfRange);
  CHECK_THROWS_AS(embed_in_slot(std::span<const std::uint8_t>(word), 4, 3),
                  SlotOutOfRange);

  std::vector<double> symbols = {1.5, -1.5};
  AwgnFrame real_frame = embed_in_slot(std::span<const double>(symbols), 1, 2);
  CHECK(real_frame.symbols[0] == 1.5);
  CHECK(real_frame.symbols[2] == 0.0);
}

TEST_CASE("discrete channel sampling") {
  DmcFrame idle;
  idle.n = 200;
  idle.L = 100;
  idle.symbols.assign(20000, 0);
  FiniteDistribution q0({0.9, 0.1});
  FiniteDistribution q1({0.1, 0.9});

  std::vector<std::uint8_t> out = pass_dmc(idle, q0, q1, 31);
  CHECK(out == pass_dmc(idle, q0, q1, 31));
  CHECK(out != pass_dmc(idle, q0, q1, 32));

  double ones = 0.0;
  for (std::uint8_t z : out) ones += z;
  double freq = ones / 20000.0;
  CHECK(std::abs(freq - 0.1) <= 5.0 * std::sqrt(0.09 / 20000.0));

  DmcFrame live = idle;
  live.symbols.assign(20000, 1);
  std::vector<std::uint8_t> live_out = pass_dmc(live, q0, q1, 31);
  double live_ones = 0.0;
  for (std::uint8_t z : live_out) live_ones += z;
  CHECK(std::abs(live_ones / 20000.0 - 0.9) <= 5.0 * std::sqrt(0.09 / 20000.0));
}

TEST_CASE("gaussian channel sampling") {
  AwgnFrame frame;
  frame.n = 100;
  frame.L = 100;
  frame.symbols.assign(10000, 0.75);
  std::vector<double> out = pass_awgn(frame, 4.0, 17);
  CHECK(out == pass_awgn(frame, 4.0, 17));
  CHECK(out != pass_awgn(frame, 4.0, 18));

  double mean = 0.0;
  for (double z : out) mean += z;
  mean /= 10000.0;
  CHECK(std::abs(mean - 0.75) <= 5.0 * 2.0 / 100.0);

  double var = 0.0;
  for (double z : out) var += (z - mean) * (z - mean);
  var /= 9999.0;
  CHECK(var == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("discrete decoder matches the density ratio definition") {
  FiniteDistribution p0({0.95, 0.05});
  FiniteDistribution p1({0.05, 0.95});
  const double alpha = 0.35;
  Stream rng(derive(41, Role::Scratch));

  for (int trial = 0; trial < 20; ++trial) {
    Codebook cb = generate_codebook(CodebookKind::DmcBernoulli, 5, 6, 0.5,
                                    1000 + static_cast<std::uint64_t>(trial));
    std::vector<std::uint8_t> slot(6);
    for (auto& z : slot) z = rng.uniform() < 0.4 ? 1 : 0;

    for (auto reference :
         {bounds::ReferenceKind::MixtureRef, bounds::ReferenceKind::PureRef}) {
      std::vector<double> densities(cb.size());
      for (std::size_t w = 0; w < cb.size(); ++w)
        densities[w] =
            naive_dmc_density(slot, cb.row(w), p0, p1, alpha, reference);

      for (double gamma : probe_thresholds(densities)) {
        std::vector<std::size_t> qualifiers;
        for (std::size_t w = 0; w < cb.size(); ++w)
          if (densities[w] > gamma) qualifiers.push_back(w);

        DmcDecoder decoder(p0, p1, alpha, cb, {gamma, reference});
        bool ambiguous = false;
        DecodeResult r = decoder.decode_slot(slot, 3, ambiguous);
        if (qualifiers.size() == 1) {
          CHECK(r.found);
          CHECK(r.message == qualifiers.front());
          CHECK(r.slot == 3);
          CHECK_FALSE(ambiguous);
        } else if (qualifiers.empty()) {
          CHECK_FALSE(r.found);
          CHECK_FALSE(ambiguous);
        } else {
          CHECK_FALSE(r.found);
          CHECK(ambiguous);
        }
      }
    }
  }
}

TEST_CASE("gaussian decoder matches the density ratio definition") {
  const double sigma_b2 = 0.8;
  Stream rng(derive(42, Role::Scratch));

  for (int trial = 0; trial < 20; ++trial) {
    Codebook cb = generate_codebook(CodebookKind::Bpsk, 5, 6, 0.9,
                                    2000 + static_cast<std::uint64_t>(trial));
    std::vector<double> slot(6);
    for (auto& z : slot) z = 1.5 * rng.normal();

    for (auto reference :
         {bounds::ReferenceKind::MixtureRef, bounds::ReferenceKind::PureRef}) {
      std::vector<double> densities(cb.size());
      for (std::size_t w = 0; w < cb.size(); ++w) {
        std::vector<double> word = cb.bpsk_row(w);
        densities[w] =
            naive_awgn_density(slot, word, 0.9, sigma_b2, reference);
      }

      for (double gamma : probe_thresholds(densities)) {
        std::vector<std::size_t> qualifiers;
        for (std::size_t w = 0; w < cb.size(); ++w)
          if (densities[w] > gamma) qualifiers.push_back(w);

        AwgnDecoder decoder(sigma_b2, cb, {gamma, reference});
        bool ambiguous = false;
        DecodeResult r = decoder.decode_slot(slot, 2, ambiguous);
        if (qualifiers.size() == 1) {
          CHECK(r.found);
          CHECK(r.message == qualifiers.front());
          CHECK(r.slot == 2);
        } else if (qualifiers.empty()) {
          CHECK_FALSE(r.found);
          CHECK_FALSE(ambiguous);
        } else {
          CHECK(ambiguous);
        }
      }
    }
  }
}

TEST_CASE("frame scan order and ambiguity stop") {
  Codebook cb(CodebookKind::Bpsk, 2, 4, 1.0, 0, {1, 1, 0, 1, 0, 1, 1, 0});
  DecoderConfig config{1.0, bounds::ReferenceKind::PureRef};
  AwgnDecoder decoder(1.0, cb, config);

  std::vector<double> w0 = cb.bpsk_row(0);
  std::vector<double> w1 = cb.bpsk_row(1);

  std::vector<double> frame;
  frame.insert(frame.end(), w1.begin(), w1.end());
  frame.insert(frame.end(), w0.begin(), w0.end());
  DecodeResult r = decoder.decode(frame, 2);
  CHECK(r.found);
  CHECK(r.message == 1);
  CHECK(r.slot == 1);

  Codebook twins(CodebookKind::Bpsk, 2, 4, 1.0, 0, {1, 1, 0, 1, 1, 1, 0, 1});
  AwgnDecoder twin_decoder(1.0, twins, config);
  std::vector<double> tie_frame;
  tie_frame.insert(tie_frame.end(), w0.begin(), w0.end());
  tie_frame.insert(tie_frame.end(), w0.begin(), w0.end());
  DecodeResult tie = twin_decoder.decode(tie_frame, 2);
  CHECK_FALSE(tie.found);

  std::vector<double> idle(8, 0.0);
  DecodeResult none = decoder.decode(idle, 2);
  CHECK_FALSE(none.found);

  CHECK_THROWS_AS(decoder.decode(std::vector<double>(7, 0.0), 2),
                  LengthMismatch);
}

TEST_CASE("decoder thresholds") {
  FiniteDistribution p0({0.95, 0.05});
  FiniteDistribution p1({0.05, 0.95});
  bounds::InfoDensityMoments moments = bounds::info_density_moments_dmc(
      p0, p1, 0.00733759290490607, bounds::ReferenceKind::MixtureRef);
  CHECK(decoder_threshold(10000, 0.25, moments) ==
        doctest::Approx(142.52622658925912).epsilon(1e-12));

  double rho = 0.027671795736775362;
  CHECK(decoder_threshold(10000, 0.25, rho, 0.25) ==
        doctest::Approx(0.75 * 10000.0 * rho / 0.5).epsilon(1e-14));

  CHECK_THROWS_AS(decoder_threshold(10, 0.0, moments), InvalidParameters);
  CHECK_THROWS_AS(decoder_threshold(10, 0.25, -1.0, 0.25),
                  NonPositiveArgument);
}

TEST_CASE("message sizes") {
  FiniteDistribution p0({0.95, 0.05});
  FiniteDistribution p1({0.05, 0.95});
  bounds::InfoDensityMoments moments = bounds::info_density_moments_dmc(
      p0, p1, 0.00733759290490607, bounds::ReferenceKind::MixtureRef);
  MessageSize desk = message_size(10000, 0.25, 0.25, moments);
  CHECK(desk.log_m == doctest::Approx(106.89466994194434).epsilon(1e-12));
  CHECK(desk.saturated);
  CHECK(desk.m == std::numeric_limits<std::uint64_t>::max());

  MessageSize awgn = message_size(10000, 0.25, 0.25, 0.027671795736775362, 0.25);
  CHECK(awgn.log_m == doctest::Approx(311.3077020387228).epsilon(1e-12));
  CHECK(awgn.saturated);

  bounds::InfoDensityMoments exact_fifty;
  exact_fifty.mean = std::log(50.5) / (0.5625 * 10.0);
  MessageSize fifty = message_size(10, 0.25, 0.25, exact_fifty);
  CHECK_FALSE(fifty.saturated);
  CHECK(fifty.m == 50);

  bounds::InfoDensityMoments tiny;
  tiny.mean = 1e-6;
  MessageSize one = message_size(10, 0.25, 0.25, tiny);
  CHECK(one.m == 1);
  CHECK_FALSE(one.saturated);

  CHECK_THROWS_AS(message_size(10, 1.0, 0.25, tiny), InvalidParameters);
}

TEST_CASE("error probability estimation") {
  Codebook cb = generate_codebook(CodebookKind::Bpsk, 4, 16, 5.0, 3);
  DecoderConfig config{17500.0, bounds::ReferenceKind::PureRef};
  ErrorEstimate clean = estimate_error_prob(cb, 4, 0.01, config, 50, 11);
  CHECK(clean.p_e_hat == 0.0);
  CHECK(clean.std_error == 0.0);

  ErrorEstimate again = estimate_error_prob(cb, 4, 0.01, config, 50, 11);
  CHECK(again.p_e_hat == clean.p_e_hat);

  DecoderConfig noisy{87.5, bounds::ReferenceKind::PureRef};
  ErrorEstimate message_level =
      estimate_error_prob(cb, 4, 2.0, noisy, 200, 12);
  ErrorEstimate slot_level =
      estimate_error_prob(cb, 4, 2.0, noisy, 200, 12, true);
  CHECK(slot_level.p_e_hat >= message_level.p_e_hat);

  CHECK_THROWS_AS(estimate_error_prob(cb, 4, 0.01, config, 0, 11),
                  NonPositiveTrials);

  FiniteDistribution p0({0.999999, 0.000001});
  FiniteDistribution p1({0.000001, 0.999999});
  Codebook dmc_cb(CodebookKind::DmcBernoulli, 2, 8, 0.5, 0,
                  {1, 1, 0, 1, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1});
  DecoderConfig dmc_config{2.0, bounds::ReferenceKind::MixtureRef};
  ErrorEstimate dmc_clean = estimate_error_prob(dmc_cb, 5, p0, p1, 0.5,
                                                dmc_config, 50, 21);
  CHECK(dmc_clean.p_e_hat == 0.0);
}
