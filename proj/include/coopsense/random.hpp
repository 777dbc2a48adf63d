// ============================================================================
// random.hpp -- seedable, splittable random streams
//
// Every stochastic quantity in a simulation is drawn from a stream keyed by
// (seed, trial, unit, purpose). Streams are cheap to create, so results do not
// depend on how trials are scheduled across workers.
// ============================================================================
#pragma once

#include <cstdint>
#include <limits>

namespace coopsense {

/// SplitMix64 (Steele, Lea, Flood). Satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_{seed} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t state_;
};

/// Derives an independent stream from a root seed and a list of keys.
template <typename... Keys>
[[nodiscard]] constexpr SplitMix64 derive_stream(std::uint64_t seed, Keys... keys) noexcept {
  std::uint64_t h = SplitMix64::mix(seed ^ 0x6A09E667F3BCC909ULL);
  ((h = SplitMix64::mix(h ^ SplitMix64::mix(static_cast<std::uint64_t>(keys) + 0x9E3779B97F4A7C15ULL))), ...);
  return SplitMix64{h};
}

/// Uniform double in [0, 1) from the top 53 bits.
template <typename Rng>
[[nodiscard]] double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace coopsense
