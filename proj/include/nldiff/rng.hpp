#pragma once
// Counter-based random numbers: every variate is a pure function of
// (seed, sample index, component index), so Monte-Carlo estimates are
// reproducible for a fixed seed regardless of how samples are split
// across threads.

#include <cstdint>

namespace nldiff {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// j-th uniform in [0,1) of the i-th sample stream.
inline double counter_uniform(std::uint64_t seed, std::uint64_t i,
                              std::uint64_t j) {
  const std::uint64_t z =
      splitmix64(splitmix64(seed + i * 0xA0761D6478BD642Full) +
                 j * 0xE7037ED1A0B428DBull);
  return double(z >> 11) * 0x1.0p-53;
}

}  // namespace nldiff
