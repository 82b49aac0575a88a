#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace rvlevy {

/// Identifies an independent noise source inside one replicate.
///
/// The Lévy jumps, the Gaussian part and the integrand each draw from their
/// own stream so that, for a fixed (seed, replicate), changing how one source
/// is consumed never perturbs the others.
enum class StreamTag : std::uint64_t {
  jumps = 0x6a756d7073ULL,
  small_part = 0x736d616c6cULL,
  integrand = 0x696e746567ULL,
  multiplier = 0x6d756c7469ULL,
  auxiliary = 0x6175786c72ULL,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256pp(std::uint64_t seed = 0) noexcept {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
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

  friend constexpr bool operator==(const Xoshiro256pp&,
                                   const Xoshiro256pp&) = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

using Rng = Xoshiro256pp;

/// Derives the generator for stream `tag` of replicate `replicate` under the
/// master `seed`. The mapping is a pure function of its three inputs, so any
/// replicate can be regenerated in isolation and in any order.
inline constexpr Rng make_stream(std::uint64_t seed, std::uint64_t replicate,
                                 StreamTag tag) noexcept {
  std::uint64_t key = seed;
  std::uint64_t h = splitmix64(key);
  key = h ^ static_cast<std::uint64_t>(tag);
  h = splitmix64(key);
  key = h ^ replicate;
  return Rng(splitmix64(key));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1].
inline double uniform_open_closed(Rng& rng) noexcept {
  return 1.0 - uniform01(rng);
}

/// Pareto radius with P(R > r) = r^{-alpha} for r >= 1.
inline double pareto(Rng& rng, double alpha) noexcept {
  return std::pow(uniform_open_closed(rng), -1.0 / alpha);
}

}  // namespace rvlevy
