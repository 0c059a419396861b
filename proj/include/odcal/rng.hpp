#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace odcal {

/// Splitmix64 finalizer; used to derive decorrelated seeds for separate
/// random streams (trip generation, noise, sampling, initialization).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Seeded random source with the distribution helpers the toolkit needs.
/// All distributions are implemented on top of the raw mt19937_64 stream so
/// that results depend only on (seed, call sequence), not on the standard
/// library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t integer(std::uint64_t n) {
    // Rejection keeps the draw unbiased for any n.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller; consumes exactly two raw draws.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Poisson draw, exact for any mean. Means above the chunk size are split
  /// into independent partial draws (a Poisson sum is Poisson) so the
  /// multiplicative inversion never underflows.
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 60.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    if (mean > 0.0) total += poisson_small(mean);
    return total;
  }

 private:
  std::uint64_t poisson_small(double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 engine_;
};

}  // namespace odcal
