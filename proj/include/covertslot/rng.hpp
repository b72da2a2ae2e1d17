/**
 * Counter-based pseudo-random streams.  A master seed plus a role tag and up
 * to three indices are hashed into an independent substream, so every trial,
 * slot, and sampling role draws from its own deterministic sequence.  Results
 * are therefore reproducible regardless of evaluation order or thread count.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace covertslot::rng {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class Role : std::uint64_t {
  Codebook = 1,
  Pick = 2,
  Noise = 3,
  TvNoise = 4,
  RocNull = 5,
  RocActive = 6,
  McSample = 7,
  Channel = 8,
  Instance = 9,
  Scratch = 10,
};

constexpr std::uint64_t derive(std::uint64_t master, Role role,
                               std::uint64_t a = 0, std::uint64_t b = 0,
                               std::uint64_t c = 0) {
  std::uint64_t h = mix(master + kGolden);
  h = mix(h ^ (static_cast<std::uint64_t>(role) + kGolden));
  h = mix(h ^ (a + kGolden));
  h = mix(h ^ (b + kGolden));
  h = mix(h ^ (c + kGolden));
  return h;
}

/** SplitMix64 sequence; satisfies UniformRandomBitGenerator. */
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() {
    state_ += kGolden;
    return mix(state_);
  }

  /** Uniform double in [0, 1). */
  double uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /** Uniform double in (0, 1]. */
  double uniform_open() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  /** Uniform integer in [0, bound). */
  std::uint64_t uniform_int(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>((*this)()) * bound) >> 64);
  }

  /** Standard normal via Box-Muller, one cached value per pair. */
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform_open()));
    double theta = 2.0 * std::numbers::pi * uniform();
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace covertslot::rng
