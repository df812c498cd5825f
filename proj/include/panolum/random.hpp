#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "panolum/common.hpp"

namespace panolum {

// Deterministic draws on top of mt19937_64. The standard distribution
// objects are implementation-defined, so the mappings live here to keep
// seeded results stable across toolchains.
namespace rng {

inline double uniform01(std::mt19937_64& gen) {
  return (gen() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline std::size_t uniform_index(std::mt19937_64& gen, std::size_t n) {
  // Multiply-shift mapping; bias is negligible for n << 2^64.
  return static_cast<std::size_t>(uniform01(gen) * static_cast<double>(n)) %
         n;
}

inline double normal(std::mt19937_64& gen) {
  // Box-Muller; one value per call keeps the stream simple to reason about.
  double u1 = 1.0 - uniform01(gen);  // (0, 1]
  double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_index(gen, i);
    std::swap(v[i - 1], v[j]);
  }
}

// First k entries of a seeded permutation of 0..n-1, ascending.
inline std::vector<int> sample_without_replacement(std::size_t n,
                                                   std::size_t k,
                                                   std::mt19937_64& gen) {
  std::vector<int> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);
  shuffle(all, gen);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace rng
}  // namespace panolum
