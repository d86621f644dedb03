#pragma once

#include <cmath>
#include <cstdint>

namespace litho {

/// Stateless counter-based random source: every draw is a pure function of
/// (seed, frame, purpose, counter), so the result does not depend on the
/// order in which frames or pixels are evaluated.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t frame,
                       std::uint64_t purpose) noexcept
      : key_(mix(mix(mix(seed) ^ (frame + 0x632be59bd9b4e019ULL)) ^
                 (purpose * 0x9e3779b97f4a7c15ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix(key_ ^ mix(counter + 0xd1b54a32d192ed03ULL));
  }

  /// Uniform in [0, 1).
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(std::uint64_t counter, double lo,
                           double hi) const noexcept {
    return lo + (hi - lo) * uniform(counter);
  }

  constexpr bool bernoulli(std::uint64_t counter, double p) const noexcept {
    return uniform(counter) < p;
  }

  /// Approximately standard normal (Irwin-Hall with 4 terms, rescaled).
  double normal(std::uint64_t counter) const noexcept {
    const std::uint64_t b = bits(counter);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
      s += static_cast<double>((b >> (16 * i)) & 0xffff) / 65535.0;
    }
    return (s - 2.0) * std::sqrt(3.0);
  }

  /// SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
};

}  // namespace litho
