#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mvgps {

// Deterministic random stream: xoshiro256++ seeded through SplitMix64.
// The engine is self-contained so that identical seeds give bit-identical
// draws on every platform and across thread counts; standard-library
// distributions make no such promise. Streams are explicit values: every
// sampler takes an Rng& and advances it, there is no global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = split_mix(x);
  }

  // Non-overlapping substream for a nested work item, e.g. repetition r of
  // study cell (a, b). Counter-based: no coordination between items needed.
  static Rng derive(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t x = master;
    x ^= (a + 1) * 0x9E3779B97F4A7C15ULL;
    x = split_mix(x);
    x ^= (b + 1) * 0xBF58476D1CE4E5B9ULL;
    x = split_mix(x);
    x ^= (c + 1) * 0x94D049BB133111EBULL;
    x = split_mix(x);
    return Rng(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via the polar method; the unused member of each
  // accepted pair is cached, so draw order stays deterministic.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

 private:
  static std::uint64_t split_mix(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mvgps
