#pragma once

#include <cstdint>
#include <limits>

namespace aimd_market {

// splitmix64 finaliser (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Top 53 bits mapped onto [0, 1).
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Variate for one agent in one round. A pure function of its key, so the
/// order in which agents or replicates are evaluated cannot change results.
constexpr double agent_variate(std::uint64_t seed, std::uint64_t agent_id,
                               std::uint64_t round) noexcept {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = mix64(seed + golden);
  h = mix64(h ^ (agent_id + golden));
  h = mix64(h ^ (round + golden));
  return to_unit_interval(h);
}

/// Sequential splitmix64 stream. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform on [lo, hi).
  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * to_unit_interval((*this)());
  }

  /// Uniform on the open interval (lo, hi).
  constexpr double uniform_open(double lo, double hi) noexcept {
    double u = 0.0;
    while (u == 0.0) u = to_unit_interval((*this)());
    return lo + (hi - lo) * u;
  }

 private:
  std::uint64_t state_;
};

}  // namespace aimd_market
