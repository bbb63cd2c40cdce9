#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fsml {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a path of indices
/// (splitmix64 mixing), e.g. derive_seed(seed, {rep, 1}).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t state = mix(base);
  for (std::uint64_t p : path) state = mix(state ^ mix(p + 0x632be59bd9b4e019ULL));
  return state;
}

}  // namespace fsml
