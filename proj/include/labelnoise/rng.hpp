#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <vector>

namespace labelnoise {

/// SplitMix64 finalizer. Used as the documented seed-derivation hash so
/// per-trial streams are independent of scheduling order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Trial seed = splitmix64 chained over (base, n, bits(d), trial). Fixed so
/// a sweep's results do not depend on worker count or execution order.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t n,
                                 double d, std::uint64_t trial) {
  std::uint64_t s = splitmix64(base_seed);
  s = splitmix64(s ^ n);
  s = splitmix64(s ^ std::bit_cast<std::uint64_t>(d));
  s = splitmix64(s ^ trial);
  return s;
}

/// mt19937_64-backed uniform source. The engine is fully specified by the
/// standard and uniforms are formed by a fixed bit manipulation, so streams
/// are reproducible across platforms (std::*_distribution would not be).
class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double next() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

/// Inverse-CDF draw from a finite distribution given by nonnegative masses
/// summing to ~1. Returns the smallest index whose cumulative mass exceeds
/// the uniform draw; rounding never lets the index escape the support.
inline std::size_t sample_index(UniformRng& rng,
                                const std::vector<double>& masses) {
  const double u = rng.next();
  double cumulative = 0.0;
  for (std::size_t a = 0; a + 1 < masses.size(); ++a) {
    cumulative += masses[a];
    if (u < cumulative) return a;
  }
  return masses.size() - 1;
}

}  // namespace labelnoise
