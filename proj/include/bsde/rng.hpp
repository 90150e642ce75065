#ifndef BSDE_RNG_HPP
#define BSDE_RNG_HPP

#include <cstdint>
#include <cmath>

namespace bsde {

// Counter-based generator: every variate is a pure function of a 256-bit
// key (seed, a, b, c), so streams can be evaluated in any order and from
// any number of workers with identical output.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
  h = splitmix64(h ^ (a * 0xd6e8feb86659fd93ULL));
  h = splitmix64(h ^ (b * 0xa0761d6478bd642fULL));
  h = splitmix64(h ^ (c * 0xe7037ed1a0b428dbULL));
  return splitmix64(h);
}

// Uniform in (0,1), 53-bit mantissa, never exactly 0 or 1.
inline double uniform01(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two keyed uniforms.
inline double normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                     std::uint64_t c) {
  const double u1 = uniform01(mix_key(seed, a, b, 2 * c));
  const double u2 = uniform01(mix_key(seed, a, b, 2 * c + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace rng
}  // namespace bsde

#endif
