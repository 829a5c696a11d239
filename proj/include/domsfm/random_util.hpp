#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace domsfm {

// SplitMix64 mixer, used to derive independent sub-seeds from one seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// salt == 0 leaves the seed untouched so salted and unsalted call sites agree
// on the default stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return salt == 0 ? seed : splitmix64(seed ^ splitmix64(salt));
}

// First k entries of a random permutation of {0, ..., n-1}.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                           std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, n - 1);
    std::swap(idx[i], idx[dist(rng)]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace domsfm
