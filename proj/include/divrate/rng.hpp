#pragma once

#include <cstdint>

namespace divrate {

/// SplitMix64 step: advances `state` and returns the next output.
/// Used for seed expansion and for deterministic seed mixing.
inline std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Combines up to four 64-bit words into one, order-sensitively: each word
/// is XOR-injected into a running state that is passed through the full
/// SplitMix64 avalanche before the next injection, so no algebraic relation
/// between the words survives. Per-trial seeds in the benchmark harness are
/// mix64(seed, point_index, trial_index, method_index), so adding a
/// method or sweep point never perturbs another one's draws.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b = 0,
                           std::uint64_t c = 0, std::uint64_t d = 0) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t word : {a, b, c, d}) {
    h ^= word;
    h = splitmix64_next(h);
  }
  return h;
}

/// xoshiro256** (Blackman/Vigna). All randomness in this library flows
/// through this generator, seeded via SplitMix64 expansion of a single
/// 64-bit seed, so every sampled histogram is reproducible from its seed.
class Xoshiro256ss {
public:
  explicit Xoshiro256ss(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0,1) with 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

} // namespace divrate
