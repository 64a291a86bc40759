// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ironstream {

// Deterministic random machinery. Everything here is pinned to named,
// standard-specified algorithms so two builds of the same sources produce
// identical sample streams:
//   - stream keys are derived with splitmix64 (Steele et al. output mix)
//   - the uniform source is std::mt19937_64, whose sequence the C++
//     standard fixes exactly
//   - normal deviates use Box-Muller on 53-bit uniforms; the distribution
//     classes of <random> are implementation-defined and are not used.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a base seed with a stream identifier into an independent key.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

/// Uniform double in (0, 1] from the top 53 bits of the generator.
inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
}

/// Seedable stream of standard-normal deviates (Box-Muller).
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream)
      : rng_(stream_key(seed, stream)) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01(rng_);
    const double u2 = uniform01(rng_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ironstream
