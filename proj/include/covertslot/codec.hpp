/**
 * Codebooks, slotted frames, channel samplers, and the slotted threshold
 * decoder.  Codewords are binary strings; bit 0 is the idle symbol and bit 1
 * the live symbol (mapped to -a / +a for BPSK).  Slots are indexed from 1.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "covertslot/bounds.hpp"
#include "covertslot/distributions.hpp"

namespace covertslot::codec {

enum class CodebookKind : std::uint8_t { DmcBernoulli = 0, Bpsk = 1 };

class Codebook {
 public:
  /**
   * bits holds size*n entries, row-major, each 0 or 1.  param is the
   * generation bias for DmcBernoulli and the amplitude for Bpsk.
   */
  Codebook(CodebookKind kind, std::size_t size, std::size_t n, double param,
           std::uint64_t seed, std::vector<std::uint8_t> bits);

  CodebookKind kind() const { return kind_; }
  std::size_t size() const { return size_; }
  std::size_t n() const { return n_; }
  double param() const { return param_; }
  double amplitude() const;
  std::uint64_t seed() const { return seed_; }

  std::uint8_t bit(std::size_t w, std::size_t i) const {
    return bits_[w * n_ + i];
  }
  std::span<const std::uint8_t> row(std::size_t w) const {
    return {bits_.data() + w * n_, n_};
  }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /** Number of live symbols in codeword w. */
  std::size_t weight(std::size_t w) const;

  /** Squared norm of codeword w under the BPSK map: n * a^2. */
  double power(std::size_t w) const;

  /** Codeword w as a real BPSK sequence (+a for bit 1, -a for bit 0). */
  std::vector<double> bpsk_row(std::size_t w) const;

  /** New codebook keeping only the listed rows; metadata is preserved. */
  Codebook subset(const std::vector<std::uint32_t>& rows) const;

 private:
  CodebookKind kind_;
  std::size_t size_;
  std::size_t n_;
  double param_;
  std::uint64_t seed_;
  std::vector<std::uint8_t> bits_;
};

/**
 * i.i.d. codebook of the given kind.  For DmcBernoulli each bit is live with
 * probability param (must lie in (0, 1)); for Bpsk bits are fair and param
 * is the amplitude (must be positive).
 */
Codebook generate_codebook(CodebookKind kind, std::size_t size, std::size_t n,
                           double param, std::uint64_t seed);

/** Codebook whose rows all carry exactly the given number of live symbols. */
Codebook constant_weight_codebook(std::size_t size, std::size_t n,
                                  std::size_t weight, std::uint64_t seed);

void save_codebook(const Codebook& cb, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

template <typename Symbol>
struct SlottedFrame {
  std::size_t n = 0;
  std::size_t L = 0;
  std::size_t slot = 1;
  std::vector<Symbol> symbols;
};

using DmcFrame = SlottedFrame<std::uint8_t>;
using AwgnFrame = SlottedFrame<double>;

/** Places the codeword in slot t (1-based) of an otherwise idle frame. */
DmcFrame embed_in_slot(std::span<const std::uint8_t> codeword, std::size_t t,
                       std::size_t L);
AwgnFrame embed_in_slot(std::span<const double> codeword, std::size_t t,
                        std::size_t L);

/** Passes each frame symbol through the binary-input channel (x0_law, x1_law). */
std::vector<std::uint8_t> pass_dmc(const DmcFrame& frame,
                                   const FiniteDistribution& x0_law,
                                   const FiniteDistribution& x1_law,
                                   std::uint64_t seed);

/** Adds N(0, sigma2) noise to each frame symbol. */
std::vector<double> pass_awgn(const AwgnFrame& frame, double sigma2,
                              std::uint64_t seed);

struct DecoderConfig {
  double gamma = 0.0;
  bounds::ReferenceKind reference = bounds::ReferenceKind::MixtureRef;
};

struct DecodeResult {
  bool found = false;
  std::size_t message = 0;
  std::size_t slot = 0;
};

/**
 * Scans slots in order; inside a slot, a codeword qualifies when its
 * accumulated log(W/R) information density exceeds gamma.  A unique
 * qualifier yields Found; several qualifiers in one slot yield Erasure and
 * the scan stops; no qualifier anywhere yields Erasure.
 */
class DmcDecoder {
 public:
  DmcDecoder(const FiniteDistribution& x0_law, const FiniteDistribution& x1_law,
             double alpha, const Codebook& cb, const DecoderConfig& config);

  DecodeResult decode(std::span<const std::uint8_t> received,
                      std::size_t L) const;
  DecodeResult decode_slot(std::span<const std::uint8_t> slot_symbols,
                           std::size_t slot_index, bool& ambiguous) const;

 private:
  const Codebook& cb_;
  DecoderConfig config_;
  std::vector<double> base_llr_;
  std::vector<double> diff_llr_;
  std::vector<std::vector<std::uint32_t>> support_;
};

/** BPSK decoder; the amplitude is read from the codebook metadata. */
class AwgnDecoder {
 public:
  AwgnDecoder(double sigma_b2, const Codebook& cb,
              const DecoderConfig& config);

  DecodeResult decode(std::span<const double> received, std::size_t L) const;
  DecodeResult decode_slot(std::span<const double> slot_symbols,
                           std::size_t slot_index, bool& ambiguous) const;

 private:
  const Codebook& cb_;
  DecoderConfig config_;
  double sigma_b2_;
  double amplitude_;
  double offset_;
  std::vector<double> signs_;
};

DecodeResult decode_slotted(std::span<const std::uint8_t> received,
                            const Codebook& cb, std::size_t L,
                            const DecoderConfig& config,
                            const FiniteDistribution& x0_law,
                            const FiniteDistribution& x1_law, double alpha);
DecodeResult decode_slotted(std::span<const double> received,
                            const Codebook& cb, std::size_t L,
                            const DecoderConfig& config, double sigma_b2);

/** (1 - nu1) * n * mean information density per symbol. */
double decoder_threshold(std::size_t n, double nu1,
                         const bounds::InfoDensityMoments& receiver_moments);

/** Gaussian analogue (1 - nu1) * n * rho / (2 sigma_b2). */
double decoder_threshold(std::size_t n, double nu1, double rho,
                         double sigma_b2);

struct MessageSize {
  double log_m = 0.0;
  std::uint64_t m = 1;
  bool saturated = false;
};

/**
 * Codebook size floor(exp((1 - delta1)(1 - nu1) n mean)), at least 1.  When
 * the exponent exceeds what a 64-bit count can hold, m pins to the maximum
 * and saturated is set; log_m always carries the exact value.
 */
MessageSize message_size(std::size_t n, double delta1, double nu1,
                         const bounds::InfoDensityMoments& receiver_moments);
MessageSize message_size(std::size_t n, double delta1, double nu1, double rho,
                         double sigma_b2);

struct ErrorEstimate {
  double p_e_hat = 0.0;
  double std_error = 0.0;
};

/**
 * Monte Carlo message error probability.  Each trial embeds a uniform
 * codeword in a uniform slot, passes the frame through the receiver channel,
 * and decodes.  A trial succeeds when the decoder finds the transmitted
 * message; with strict_slot it must also name the true slot.
 */
ErrorEstimate estimate_error_prob(const Codebook& cb, std::size_t L,
                                  const FiniteDistribution& x0_law,
                                  const FiniteDistribution& x1_law,
                                  double alpha, const DecoderConfig& config,
                                  std::int64_t trials, std::uint64_t seed,
                                  bool strict_slot = false);
ErrorEstimate estimate_error_prob(const Codebook& cb, std::size_t L,
                                  double sigma_b2,
                                  const DecoderConfig& config,
                                  std::int64_t trials, std::uint64_t seed,
                                  bool strict_slot = false);

}  // namespace covertslot::codec
