#include "covertslot/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include "covertslot/kernels.hpp"
#include "covertslot/parallel.hpp"
#include "covertslot/rng.hpp"

namespace covertslot::codec {

namespace {

constexpr char kMagic[4] = {'C', 'V', 'S', 'L'};
constexpr std::uint8_t kFormatVersion = 1;

std::size_t sample_symbol(const FiniteDistribution& law, rng::Stream& stream) {
  double u = stream.uniform();
  double acc = 0.0;
  for (std::size_t z = 0; z + 1 < law.size(); ++z) {
    acc += law[z];
    if (u < acc) return z;
  }
  return law.size() - 1;
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void append_u64(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::uint32_t read_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return v;
}

std::uint64_t read_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return v;
}

}  // namespace

Codebook::Codebook(CodebookKind kind, std::size_t size, std::size_t n,
                   double param, std::uint64_t seed,
                   std::vector<std::uint8_t> bits)
    : kind_(kind), size_(size), n_(n), param_(param), seed_(seed),
      bits_(std::move(bits)) {
  if (size_ < 1 || n_ < 1) throw InvalidParameters("need size >= 1 and n >= 1");
  if (bits_.size() != size_ * n_)
    throw LengthMismatch("bit buffer does not match size * n");
  for (std::uint8_t b : bits_)
    if (b > 1) throw InvalidParameters("codeword entries must be 0 or 1");
  if (kind_ == CodebookKind::Bpsk && !(param_ > 0.0))
    throw InvalidParameters("BPSK amplitude must be positive");
}

double Codebook::amplitude() const {
  if (kind_ != CodebookKind::Bpsk)
    throw InvalidParameters("amplitude is defined for BPSK codebooks only");
  return param_;
}

std::size_t Codebook::weight(std::size_t w) const {
  auto r = row(w);
  return static_cast<std::size_t>(std::count(r.begin(), r.end(), 1));
}

double Codebook::power(std::size_t w) const {
  (void)w;
  double a = amplitude();
  return static_cast<double>(n_) * a * a;
}

std::vector<double> Codebook::bpsk_row(std::size_t w) const {
  double a = amplitude();
  std::vector<double> out(n_);
  auto r = row(w);
  for (std::size_t i = 0; i < n_; ++i) out[i] = r[i] ? a : -a;
  return out;
}

Codebook Codebook::subset(const std::vector<std::uint32_t>& rows) const {
  if (rows.empty()) throw InvalidParameters("subset must keep at least one row");
  std::vector<std::uint8_t> bits;
  bits.reserve(rows.size() * n_);
  for (std::uint32_t w : rows) {
    if (w >= size_) throw RangeViolation("row index out of range");
    auto r = row(w);
    bits.insert(bits.end(), r.begin(), r.end());
  }
  return Codebook(kind_, rows.size(), n_, param_, seed_, std::move(bits));
}

Codebook generate_codebook(CodebookKind kind, std::size_t size, std::size_t n,
                           double param, std::uint64_t seed) {
  if (size < 1 || n < 1) throw InvalidParameters("need size >= 1 and n >= 1");
  if (kind == CodebookKind::DmcBernoulli && !(param > 0.0 && param < 1.0))
    throw InvalidParameters("live-symbol bias must lie in (0, 1)");
  if (kind == CodebookKind::Bpsk && !(param > 0.0))
    throw InvalidParameters("BPSK amplitude must be positive");
  double live_prob = kind == CodebookKind::DmcBernoulli ? param : 0.5;
  std::vector<std::uint8_t> bits(size * n);
  for (std::size_t w = 0; w < size; ++w) {
    rng::Stream stream(rng::derive(seed, rng::Role::Codebook, w));
    for (std::size_t i = 0; i < n; ++i)
      bits[w * n + i] = stream.uniform() < live_prob ? 1 : 0;
  }
  return Codebook(kind, size, n, param, seed, std::move(bits));
}

Codebook constant_weight_codebook(std::size_t size, std::size_t n,
                                  std::size_t weight, std::uint64_t seed) {
  if (size < 1 || n < 1) throw InvalidParameters("need size >= 1 and n >= 1");
  if (weight > n) throw InvalidParameters("weight cannot exceed n");
  std::vector<std::uint8_t> bits(size * n, 0);
  for (std::size_t w = 0; w < size; ++w) {
    rng::Stream stream(rng::derive(seed, rng::Role::Codebook, w));
    // Partial Fisher-Yates over symbol positions.
    std::vector<std::uint32_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<std::uint32_t>(i);
    for (std::size_t k = 0; k < weight; ++k) {
      std::size_t j = k + static_cast<std::size_t>(stream.uniform_int(n - k));
      std::swap(pos[k], pos[j]);
      bits[w * n + pos[k]] = 1;
    }
  }
  double bias = n == 0 ? 0.0 : static_cast<double>(weight) / static_cast<double>(n);
  bias = std::clamp(bias, 1e-12, 1.0 - 1e-12);
  return Codebook(CodebookKind::DmcBernoulli, size, n, bias, seed,
                  std::move(bits));
}

void save_codebook(const Codebook& cb, const std::filesystem::path& path) {
  std::string out;
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kFormatVersion));
  out.push_back(static_cast<char>(cb.kind()));
  append_u32(out, static_cast<std::uint32_t>(cb.size()));
  append_u32(out, static_cast<std::uint32_t>(cb.n()));
  append_u64(out, cb.seed());
  if (cb.kind() == CodebookKind::Bpsk) {
    double a = cb.amplitude();
    std::uint64_t raw;
    std::memcpy(&raw, &a, 8);
    append_u64(out, raw);
  }
  // Bits packed row-major, least significant bit first within each byte.
  const auto& bits = cb.bits();
  std::size_t packed_len = (bits.size() + 7) / 8;
  std::string packed(packed_len, '\0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) packed[i / 8] = static_cast<char>(packed[i / 8] | (1 << (i % 8)));
  out += packed;

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("short write to " + path.string());
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(file)),
                   std::istreambuf_iterator<char>());
  if (data.size() < 22 || std::memcmp(data.data(), kMagic, 4) != 0)
    throw IoError("not a codebook file: " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  if (p[4] != kFormatVersion) throw IoError("unsupported codebook version");
  auto kind = static_cast<CodebookKind>(p[5]);
  if (kind != CodebookKind::DmcBernoulli && kind != CodebookKind::Bpsk)
    throw IoError("unknown codebook kind");
  std::size_t size = read_u32(p + 6);
  std::size_t n = read_u32(p + 10);
  std::uint64_t seed = read_u64(p + 14);
  std::size_t offset = 22;
  double param = 0.5;
  if (kind == CodebookKind::Bpsk) {
    if (data.size() < offset + 8) throw IoError("truncated codebook file");
    std::uint64_t raw = read_u64(p + offset);
    std::memcpy(&param, &raw, 8);
    offset += 8;
  }
  std::size_t nbits = size * n;
  std::size_t packed_len = (nbits + 7) / 8;
  if (data.size() != offset + packed_len)
    throw IoError("codebook payload length mismatch");
  std::vector<std::uint8_t> bits(nbits);
  for (std::size_t i = 0; i < nbits; ++i)
    bits[i] = (p[offset + i / 8] >> (i % 8)) & 1;
  return Codebook(kind, size, n, param, seed, std::move(bits));
}

DmcFrame embed_in_slot(std::span<const std::uint8_t> codeword, std::size_t t,
                       std::size_t L) {
  if (L < 1) throw InvalidParameters("need L >= 1");
  if (t < 1 || t > L) throw SlotOutOfRange("slot index must lie in [1, L]");
  DmcFrame frame;
  frame.n = codeword.size();
  frame.L = L;
  frame.slot = t;
  frame.symbols.assign(frame.n * L, 0);
  std::copy(codeword.begin(), codeword.end(),
            frame.symbols.begin() + static_cast<std::ptrdiff_t>((t - 1) * frame.n));
  return frame;
}

AwgnFrame embed_in_slot(std::span<const double> codeword, std::size_t t,
                        std::size_t L) {
  if (L < 1) throw InvalidParameters("need L >= 1");
  if (t < 1 || t > L) throw SlotOutOfRange("slot index must lie in [1, L]");
  AwgnFrame frame;
  frame.n = codeword.size();
  frame.L = L;
  frame.slot = t;
  frame.symbols.assign(frame.n * L, 0.0);
  std::copy(codeword.begin(), codeword.end(),
            frame.symbols.begin() + static_cast<std::ptrdiff_t>((t - 1) * frame.n));
  return frame;
}

std::vector<std::uint8_t> pass_dmc(const DmcFrame& frame,
                                   const FiniteDistribution& x0_law,
                                   const FiniteDistribution& x1_law,
                                   std::uint64_t seed) {
  if (x0_law.size() != x1_law.size())
    throw AlphabetMismatch("laws are over different alphabets");
  std::vector<std::uint8_t> out(frame.symbols.size());
  rng::Stream stream(rng::derive(seed, rng::Role::Channel));
  for (std::size_t i = 0; i < frame.symbols.size(); ++i) {
    const FiniteDistribution& law = frame.symbols[i] ? x1_law : x0_law;
    out[i] = static_cast<std::uint8_t>(sample_symbol(law, stream));
  }
  return out;
}

std::vector<double> pass_awgn(const AwgnFrame& frame, double sigma2,
                              std::uint64_t seed) {
  if (!(sigma2 >= 0.0)) throw NonPositiveVariance("variance must be >= 0");
  double sd = std::sqrt(sigma2);
  std::vector<double> out(frame.symbols.size());
  rng::Stream stream(rng::derive(seed, rng::Role::Channel));
  for (std::size_t i = 0; i < frame.symbols.size(); ++i)
    out[i] = frame.symbols[i] + sd * stream.normal();
  return out;
}

DmcDecoder::DmcDecoder(const FiniteDistribution& x0_law,
                       const FiniteDistribution& x1_law, double alpha,
                       const Codebook& cb, const DecoderConfig& config)
    : cb_(cb), config_(config) {
  if (x0_law.size() != x1_law.size())
    throw AlphabetMismatch("laws are over different alphabets");
  std::size_t Y = x0_law.size();
  base_llr_.assign(Y, 0.0);
  diff_llr_.assign(Y, 0.0);
  if (config.reference == bounds::ReferenceKind::MixtureRef) {
    FiniteDistribution ref = mixture(x0_law, x1_law, alpha);
    for (std::size_t y = 0; y < Y; ++y)
      base_llr_[y] = x0_law[y] > 0.0 ? std::log(x0_law[y] / ref[y]) : 0.0;
  }
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < Y; ++y) {
    if (x0_law[y] > 0.0)
      diff_llr_[y] = x1_law[y] > 0.0 ? std::log(x1_law[y] / x0_law[y]) : neg_inf;
  }
  support_.resize(cb.size());
  for (std::size_t w = 0; w < cb.size(); ++w) {
    auto r = cb.row(w);
    for (std::size_t i = 0; i < cb.n(); ++i)
      if (r[i]) support_[w].push_back(static_cast<std::uint32_t>(i));
  }
}

DecodeResult DmcDecoder::decode_slot(std::span<const std::uint8_t> slot_symbols,
                                     std::size_t slot_index,
                                     bool& ambiguous) const {
  ambiguous = false;
  if (slot_symbols.size() != cb_.n())
    throw LengthMismatch("slot length does not match codeword length");
  double base = 0.0;
  for (std::uint8_t y : slot_symbols) base += base_llr_[y];
  DecodeResult result;
  for (std::size_t w = 0; w < cb_.size(); ++w) {
    double density = base;
    for (std::uint32_t idx : support_[w]) density += diff_llr_[slot_symbols[idx]];
    if (density > config_.gamma) {
      if (result.found) {
        ambiguous = true;
        return DecodeResult{};
      }
      result = DecodeResult{true, w, slot_index};
    }
  }
  return result;
}

DecodeResult DmcDecoder::decode(std::span<const std::uint8_t> received,
                                std::size_t L) const {
  if (received.size() != cb_.n() * L)
    throw LengthMismatch("received length does not match n * L");
  for (std::size_t t = 1; t <= L; ++t) {
    bool ambiguous = false;
    DecodeResult r = decode_slot(received.subspan((t - 1) * cb_.n(), cb_.n()),
                                 t, ambiguous);
    if (ambiguous) return DecodeResult{};
    if (r.found) return r;
  }
  return DecodeResult{};
}

AwgnDecoder::AwgnDecoder(double sigma_b2, const Codebook& cb,
                         const DecoderConfig& config)
    : cb_(cb), config_(config), sigma_b2_(sigma_b2),
      amplitude_(cb.amplitude()) {
  if (!(sigma_b2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  offset_ = static_cast<double>(cb.n()) * amplitude_ * amplitude_ /
            (2.0 * sigma_b2);
  signs_.resize(cb.size() * cb.n());
  const std::uint8_t* bits = cb.bits().data();
  for (std::size_t i = 0; i < signs_.size(); ++i)
    signs_[i] = bits[i] ? 1.0 : -1.0;
}

DecodeResult AwgnDecoder::decode_slot(std::span<const double> slot_symbols,
                                      std::size_t slot_index,
                                      bool& ambiguous) const {
  ambiguous = false;
  if (slot_symbols.size() != cb_.n())
    throw LengthMismatch("slot length does not match codeword length");
  double base = 0.0;
  if (config_.reference == bounds::ReferenceKind::MixtureRef) {
    for (double y : slot_symbols)
      base -= std::log1p(gaussian_llr_weight(y, amplitude_, sigma_b2_));
  }
  double scale = amplitude_ / sigma_b2_;
  DecodeResult result;
  for (std::size_t w = 0; w < cb_.size(); ++w) {
    const double* row_signs = signs_.data() + w * cb_.n();
    double dot = fixed_order_dot(row_signs, slot_symbols.data(), cb_.n());
    double density = base + scale * dot - offset_;
    if (density > config_.gamma) {
      if (result.found) {
        ambiguous = true;
        return DecodeResult{};
      }
      result = DecodeResult{true, w, slot_index};
    }
  }
  return result;
}

DecodeResult AwgnDecoder::decode(std::span<const double> received,
                                 std::size_t L) const {
  if (received.size() != cb_.n() * L)
    throw LengthMismatch("received length does not match n * L");
  for (std::size_t t = 1; t <= L; ++t) {
    bool ambiguous = false;
    DecodeResult r = decode_slot(received.subspan((t - 1) * cb_.n(), cb_.n()),
                                 t, ambiguous);
    if (ambiguous) return DecodeResult{};
    if (r.found) return r;
  }
  return DecodeResult{};
}

DecodeResult decode_slotted(std::span<const std::uint8_t> received,
                            const Codebook& cb, std::size_t L,
                            const DecoderConfig& config,
                            const FiniteDistribution& x0_law,
                            const FiniteDistribution& x1_law, double alpha) {
  DmcDecoder decoder(x0_law, x1_law, alpha, cb, config);
  return decoder.decode(received, L);
}

DecodeResult decode_slotted(std::span<const double> received,
                            const Codebook& cb, std::size_t L,
                            const DecoderConfig& config, double sigma_b2) {
  AwgnDecoder decoder(sigma_b2, cb, config);
  return decoder.decode(received, L);
}

double decoder_threshold(std::size_t n, double nu1,
                         const bounds::InfoDensityMoments& receiver_moments) {
  if (!(nu1 > 0.0 && nu1 < 1.0))
    throw InvalidParameters("slack must lie in (0, 1)");
  return (1.0 - nu1) * static_cast<double>(n) * receiver_moments.mean;
}

double decoder_threshold(std::size_t n, double nu1, double rho,
                         double sigma_b2) {
  if (!(nu1 > 0.0 && nu1 < 1.0))
    throw InvalidParameters("slack must lie in (0, 1)");
  if (!(rho >= 0.0)) throw NonPositiveArgument("per-symbol power must be >= 0");
  if (!(sigma_b2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  return (1.0 - nu1) * static_cast<double>(n) * rho / (2.0 * sigma_b2);
}

namespace {

MessageSize message_size_from_log(double log_m) {
  MessageSize out;
  out.log_m = log_m;
  if (log_m >= 62.0 * std::numbers::ln2_v<double>) {
    out.m = std::numeric_limits<std::uint64_t>::max();
    out.saturated = true;
    return out;
  }
  out.m = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::floor(std::exp(log_m))));
  return out;
}

}  // namespace

MessageSize message_size(std::size_t n, double delta1, double nu1,
                         const bounds::InfoDensityMoments& receiver_moments) {
  if (!(delta1 > 0.0 && delta1 < 1.0) || !(nu1 > 0.0 && nu1 < 1.0))
    throw InvalidParameters("slacks must lie in (0, 1)");
  return message_size_from_log((1.0 - delta1) * (1.0 - nu1) *
                               static_cast<double>(n) * receiver_moments.mean);
}

MessageSize message_size(std::size_t n, double delta1, double nu1, double rho,
                         double sigma_b2) {
  if (!(delta1 > 0.0 && delta1 < 1.0) || !(nu1 > 0.0 && nu1 < 1.0))
    throw InvalidParameters("slacks must lie in (0, 1)");
  if (!(rho >= 0.0)) throw NonPositiveArgument("per-symbol power must be >= 0");
  if (!(sigma_b2 > 0.0)) throw NonPositiveVariance("variance must be positive");
  return message_size_from_log((1.0 - delta1) * (1.0 - nu1) *
                               static_cast<double>(n) * rho / (2.0 * sigma_b2));
}

namespace {

struct TrialTally {
  std::vector<std::uint8_t> errors;

  ErrorEstimate reduce() const {
    double sum = 0.0;
    for (std::uint8_t e : errors) sum += e;
    double n = static_cast<double>(errors.size());
    double p = sum / n;
    return {p, std::sqrt(std::max(0.0, p * (1.0 - p)) / n)};
  }
};

}  // namespace

ErrorEstimate estimate_error_prob(const Codebook& cb, std::size_t L,
                                  const FiniteDistribution& x0_law,
                                  const FiniteDistribution& x1_law,
                                  double alpha, const DecoderConfig& config,
                                  std::int64_t trials, std::uint64_t seed,
                                  bool strict_slot) {
  if (trials < 1) throw NonPositiveTrials("need at least one trial");
  if (L < 1) throw InvalidParameters("need L >= 1");
  DmcDecoder decoder(x0_law, x1_law, alpha, cb, config);
  TrialTally tally;
  tally.errors.assign(static_cast<std::size_t>(trials), 1);
  std::size_t n = cb.n();
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    rng::Stream pick(rng::derive(seed, rng::Role::Pick, trial));
    std::size_t w = static_cast<std::size_t>(pick.uniform_int(cb.size()));
    std::size_t t = 1 + static_cast<std::size_t>(pick.uniform_int(L));
    auto codeword = cb.row(w);
    std::vector<std::uint8_t> slot(n);
    DecodeResult outcome;
    bool ambiguous = false;
    for (std::size_t ell = 1; ell <= L && !ambiguous; ++ell) {
      rng::Stream noise(rng::derive(seed, rng::Role::Noise, trial, ell));
      if (ell == t) {
        for (std::size_t i = 0; i < n; ++i)
          slot[i] = static_cast<std::uint8_t>(
              sample_symbol(codeword[i] ? x1_law : x0_law, noise));
      } else {
        for (std::size_t i = 0; i < n; ++i)
          slot[i] = static_cast<std::uint8_t>(sample_symbol(x0_law, noise));
      }
      DecodeResult r = decoder.decode_slot(slot, ell, ambiguous);
      if (r.found) {
        outcome = r;
        break;
      }
    }
    bool ok = outcome.found && outcome.message == w &&
              (!strict_slot || outcome.slot == t);
    tally.errors[trial] = ok ? 0 : 1;
  });
  return tally.reduce();
}

ErrorEstimate estimate_error_prob(const Codebook& cb, std::size_t L,
                                  double sigma_b2,
                                  const DecoderConfig& config,
                                  std::int64_t trials, std::uint64_t seed,
                                  bool strict_slot) {
  if (trials < 1) throw NonPositiveTrials("need at least one trial");
  if (L < 1) throw InvalidParameters("need L >= 1");
  AwgnDecoder decoder(sigma_b2, cb, config);
  double a = cb.amplitude();
  double sd = std::sqrt(sigma_b2);
  TrialTally tally;
  tally.errors.assign(static_cast<std::size_t>(trials), 1);
  std::size_t n = cb.n();
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    rng::Stream pick(rng::derive(seed, rng::Role::Pick, trial));
    std::size_t w = static_cast<std::size_t>(pick.uniform_int(cb.size()));
    std::size_t t = 1 + static_cast<std::size_t>(pick.uniform_int(L));
    auto codeword = cb.row(w);
    std::vector<double> slot(n);
    DecodeResult outcome;
    bool ambiguous = false;
    for (std::size_t ell = 1; ell <= L && !ambiguous; ++ell) {
      rng::Stream noise(rng::derive(seed, rng::Role::Noise, trial, ell));
      if (ell == t) {
        for (std::size_t i = 0; i < n; ++i)
          slot[i] = (codeword[i] ? a : -a) + sd * noise.normal();
      } else {
        for (std::size_t i = 0; i < n; ++i) slot[i] = sd * noise.normal();
      }
      DecodeResult r = decoder.decode_slot(slot, ell, ambiguous);
      if (r.found) {
        outcome = r;
        break;
      }
    }
    bool ok = outcome.found && outcome.message == w &&
              (!strict_slot || outcome.slot == t);
    tally.errors[trial] = ok ? 0 : 1;
  });
  return tally.reduce();
}

}  // namespace covertslot::codec
