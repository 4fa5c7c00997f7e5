#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cpa {

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64{seed}; }

// Bounded draw with a fixed reduction so sequences depend only on the engine
// state, not on library-specific distribution internals.
inline int64_t uniform_index(std::mt19937_64& rng, int64_t n) {
  return static_cast<int64_t>(rng() % static_cast<uint64_t>(n));
}

// Uniform integer in [lo, hi] inclusive.
inline int64_t uniform_int(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return lo + uniform_index(rng, hi - lo + 1);
}

inline double uniform_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; two uniforms per call keeps the stream layout obvious and
// platform-independent.
inline double gaussian(std::mt19937_64& rng) {
  double u1 = 0.0;
  do {
    u1 = uniform_real(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform_real(rng);
  const double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace cpa
