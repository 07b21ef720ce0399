#ifndef MELOTOK_RNG_H_
#define MELOTOK_RNG_H_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace melotok {

// SplitMix64 (Steele, Lea & Flood). Every stochastic routine in the library
// draws from this generator so results are reproducible across platforms and
// standard-library implementations:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t NextU64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double NextDouble() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Uses rejection to avoid modulo bias; n > 0.
  std::uint64_t NextBelow(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = NextU64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; one draw per call, no cached pair.
  double NextGaussian() {
    double u1;
    do {
      u1 = NextDouble();
    } while (u1 <= 0.0);
    const double u2 = NextDouble();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed, e.g. one per RVQ stage.
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t salt) {
  SplitMix64 mix(seed ^ (salt * 0xD1B54A32D192ED03ULL));
  return mix.NextU64();
}

}  // namespace melotok

#endif  // MELOTOK_RNG_H_
