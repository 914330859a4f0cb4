#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace qdim {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-split random stream: the stream for (seed, index) is a pure
/// function of both, so per-position streams can be drawn on any worker in
/// any order and still reproduce the sequential result bit for bit.
///
/// The generator itself is splitmix64, which is plenty for Monte Carlo
/// count sampling and has no cross-platform variability.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_index = 0)
      : state_(mix64(mix64(seed) ^ mix64(stream_index ^ 0xA3C59AC2F1EE4D7BULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Poisson draw with the given mean. Multiplication method on chunks of
  /// mean <= 60 so exp() never underflows; exact for any mean and identical
  /// on every platform (std::poisson_distribution is not).
  std::int64_t next_poisson(double mean) {
    if (mean < 0.0 || !(mean == mean)) throw std::invalid_argument("poisson mean must be >= 0");
    if (mean == 0.0) return 0;
    std::int64_t total = 0;
    double remaining = mean;
    constexpr double kChunk = 60.0;
    while (remaining > 0.0) {
      const double lambda = remaining > kChunk ? kChunk : remaining;
      remaining -= lambda;
      const double threshold = std::exp(-lambda);
      double product = 1.0;
      std::int64_t count = -1;
      do {
        product *= next_double();
        ++count;
      } while (product > threshold);
      total += count;
    }
    return total;
  }

 private:
  std::uint64_t state_;
};

}  // namespace qdim
