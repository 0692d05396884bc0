#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace convrot {

// Name of the pinned stream contract, recorded in tensor manifests.
inline constexpr const char* kRngContract = "mt19937_64-boxmuller-v1";

// Seeded random stream with a fixed, documented discipline so that values
// can be frozen in tests and reproduced from manifests:
//   - raw draws come from std::mt19937_64 seeded directly with `seed`
//     (the engine's output sequence is pinned by the C++ standard);
//   - uniform doubles map the top 53 bits of one draw to [0,1);
//   - gaussians use Box-Muller on two consecutive uniforms, returning the
//     cosine branch first and caching the sine branch;
//   - bounded integers reduce one draw modulo `bound`.
// Consumers draw in row-major order unless documented otherwise.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = next_double();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Uniform in [0, bound). bound must be nonzero.
  uint64_t next_below(uint64_t bound) { return next_u64() % bound; }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace convrot
