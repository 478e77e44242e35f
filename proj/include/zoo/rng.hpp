#ifndef ZOO_RNG_HPP
#define ZOO_RNG_HPP

#include <cstdint>
#include <random>

namespace zoo {

using Rng = std::mt19937_64;

/// Unbiased draw from [0, n) by rejection. Hand-rolled so the consumed
/// stream is identical across standard libraries.
inline std::uint64_t rng_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double rng_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rng_uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng_unit(rng);
}

/// splitmix64 step, used to derive independent per-task seeds.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace zoo

#endif  // ZOO_RNG_HPP
