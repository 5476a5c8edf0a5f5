#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aberrasim {

/// Mixes a (seed, stream) pair into an independent 64-bit state.
/// splitmix64 finalizer; used to derive per-patch / per-layer RNG streams
/// so results do not depend on scheduling order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic normal sampler. std::normal_distribution has an
/// implementation-defined sequence, so Box-Muller over mt19937_64 is used
/// instead; output is identical across platforms and stdlib versions.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    // one normal per call, two uniforms each; no spare caching so the
    // draw count per sample is fixed
    double u1 = uniform_open();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double uniform() {  // [0,1)
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  double uniform_open() {  // (0,1]
    return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::uint64_t raw() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace aberrasim
