/**
 * Brute-force oracle for small frames.  Enumerates every output sequence of
 * an L-slot frame, tabulates the idle product law, the single-live-slot
 * mixture law, and the law induced by an actual codebook, and evaluates
 * divergences on the dense tables.  Sequences are indexed in base |alphabet|
 * with position 0 as the most significant digit.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covertslot/codec.hpp"
#include "covertslot/distributions.hpp"

namespace covertslot::exact {

/**
 * Frame description accepted by the enumerators.  Construction fails with
 * TooLargeToEnumerate unless |alphabet|^(n L) <= 1e8 and n L <= 26.
 * The optional codebook must match n and use binary-input symbols.
 */
struct ExactInstance {
  std::size_t n;
  std::size_t L;
  DmcPair channel;
  double alpha;
  std::optional<codec::Codebook> codebook;

  ExactInstance(std::size_t n_in, std::size_t L_in, DmcPair channel_in,
                double alpha_in,
                std::optional<codec::Codebook> codebook_in = std::nullopt);

  std::size_t alphabet() const { return channel.q0.size(); }
  std::size_t total_len() const { return n * L; }
  std::size_t table_size() const;
};

/** i.i.d. product law of base over sequences of length len. */
std::vector<double> product_law(const FiniteDistribution& base,
                                std::size_t len);

/**
 * Observer law of a frame whose live slot is uniform over the L slots and
 * carries i.i.d. alpha-mixture symbols; idle slots are i.i.d. idle symbols.
 */
std::vector<double> exact_mixture_law(const ExactInstance& instance);

/**
 * Observer law induced by transmitting a uniformly chosen codeword of the
 * instance codebook in a uniformly chosen slot.
 */
std::vector<double> exact_induced_law(const ExactInstance& instance);

double exact_kl(const std::vector<double>& p, const std::vector<double>& q);
double exact_tv(const std::vector<double>& p, const std::vector<double>& q);

/** Two-column table "sequence_index,probability" with CRLF line ends. */
std::string table_csv(const std::vector<double>& law);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/**
 * Importance-sampling estimate of the divergence between the live-slot BPSK
 * frame law and the all-idle Gaussian law.  Requires trials >= 10000.
 */
McEstimate mc_kl_awgn(std::size_t n, std::size_t L, double rho,
                      double sigma_w2, std::int64_t trials,
                      std::uint64_t seed);

}  // namespace covertslot::exact
