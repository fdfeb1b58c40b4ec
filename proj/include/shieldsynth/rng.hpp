#pragma once

#include <cmath>
#include <cstdint>

namespace shieldsynth {

/// Deterministic splittable RNG (splitmix64). Streams derived with
/// derive_seed are independent, so per-episode and per-step draws are pure
/// functions of (seed, indices) — the counterfactual replay in sim relies
/// on this.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi].
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Standard normal via Box-Muller (two uniforms per draw, no caching, so
  /// the stream position is a pure function of the draw count).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    // guard log(0)
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  uint64_t state_;
};

/// Mixes a seed with a stream index into a new independent seed.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL + index * 0xbf58476d1ce4e5b9ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace shieldsynth
