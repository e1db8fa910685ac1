#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rdslab {

// splitmix64; used to derive independent per-worker / per-sample seed streams
// from a single user seed so that batch results do not depend on thread count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
  splitmix64(s);
  return splitmix64(s);
}

// Uniform double in [0,1) with 53 random bits. mt19937_64 output is fully
// specified by the standard, so draws are reproducible across platforms.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Sample an index from explicit probabilities (inverse-CDF walk).
inline int sample_categorical(std::span<const double> probs, std::mt19937_64& rng) {
  double u = uniform01(rng);
  double acc = 0.0;
  const int n = static_cast<int>(probs.size());
  for (int i = 0; i < n; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;  // guard against rounding in the final partial sum
}

}  // namespace rdslab
