#pragma once

#include <cstdint>

namespace mcufuzz {

// xoshiro256** seeded via splitmix64. Self-contained so that campaigns
// reproduce bit-exactly regardless of platform or standard library.
class Rng {
public:
  explicit Rng(uint64_t seed = 0) {
    uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9E3779B97F4A7C15ull;
      uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      word = z ^ (z >> 31);
    }
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }
  uint8_t next_byte() { return static_cast<uint8_t>(next_u64() >> 56); }

  // Uniform in [0, n). n must be nonzero.
  uint64_t below(uint64_t n) { return next_u64() % n; }

  bool chance_one_in(uint64_t n) { return below(n) == 0; }

private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
};

}  // namespace mcufuzz
