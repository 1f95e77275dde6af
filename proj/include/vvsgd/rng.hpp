#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vvsgd {

// Stream roles for deterministic seed derivation. Distinct
// (master, replicate, role) triples yield independent streams.
enum class StreamRole : std::uint64_t {
  world_init = 1,
  inputs = 2,
  noise = 3,
  mc_eval = 4,
  task = 5,
  trial = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                                 StreamRole role) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h + replicate);
  h = splitmix64(h + static_cast<std::uint64_t>(role));
  return h;
}

inline std::mt19937_64 seed_split(std::uint64_t master, std::uint64_t replicate,
                                  StreamRole role) {
  return std::mt19937_64(derive_seed(master, replicate, role));
}

// Uniform in [0,1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller. Self-contained so that streams do not
// depend on the standard library's distribution internals.
inline double standard_normal(std::mt19937_64& g) {
  double u;
  do {
    u = uniform01(g);
  } while (u == 0.0);
  const double v = uniform01(g);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
}

inline double rademacher(std::mt19937_64& g) { return (g() & 1ULL) ? 1.0 : -1.0; }

}  // namespace vvsgd
