#pragma once

#include <cstdint>

namespace holderlab {

/// SplitMix64 generator. The exact bit sequence is part of the public
/// contract (see README): seeds reproduce fields across implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Integer in [0, m) by plain modulo reduction (m > 0).
  std::uint64_t below(std::uint64_t m) { return next() % m; }

  /// Uniform double in [-1, 1).
  double symmetric() { return 2.0 * uniform() - 1.0; }

 private:
  std::uint64_t state_;
};

}  // namespace holderlab
