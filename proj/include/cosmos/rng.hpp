#ifndef COSMOS_RNG_HPP_
#define COSMOS_RNG_HPP_

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cosmos {

// SplitMix64 (Steele, Lea & Flood 2014): 64-bit state advanced by the
// golden-ratio increment, output mixed by two xor-multiply rounds. The
// integer stream is reproducible on any platform; floating-point draws are
// bit-reproducible for a given libm. All toolkit randomness flows through
// this generator so a seed fully determines every output.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1): top 53 bits scaled by 2^-53.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]; safe as a log argument.
  double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  // Unbiased integer in [0, bound) by masked rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t mask = ~0ULL >> std::countl_zero(bound | 1);
    for (;;) {
      const std::uint64_t x = next() & mask;
      if (x < bound) return x;
    }
  }

  // Standard normal via Box-Muller; draws two uniforms per pair and caches
  // the second value.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Deterministic child seed for an independent substream. Used so that,
  // e.g., adding a mixture percentage does not perturb the draws of others.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    return g.next();
  }

  SplitMix64 substream(std::uint64_t stream) const {
    return SplitMix64(derive(state_, stream));
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace cosmos

#endif  // COSMOS_RNG_HPP_
