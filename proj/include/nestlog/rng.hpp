#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nestlog {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent per-chain or
/// per-replicate seeds from a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = 0.0;
  do {
    u = unif(rng);
  } while (u <= 0.0);
  return u;
}

/// Unit exponential, strictly positive.
inline double unit_exponential(Rng& rng) { return -std::log(uniform_open(rng)); }

}  // namespace nestlog
