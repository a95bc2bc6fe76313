#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace entlink {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** generator. Cheap to seed, so every trial gets its own stream.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept {
    for (auto& word : state_) word = splitmix64(seed);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
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

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

using Rng = Xoshiro256;

/// Seed of the sub-stream identified by (seed, domain, index). Stable across platforms.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t domain,
                                           std::uint64_t index) noexcept {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (domain * 0xd1b54a32d192ed03ULL);
  h = splitmix64(s);
  s = h ^ (index * 0x8cb92ba72f3d8dd7ULL);
  return splitmix64(s);
}

inline Rng substream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) noexcept {
  return Rng(derive_seed(seed, domain, index));
}

}  // namespace entlink
