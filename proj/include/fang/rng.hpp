#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <string_view>

namespace fang {

using Rng = std::mt19937_64;

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, entity key, purpose, round); used wherever
// a node owns its own randomness so results never depend on visit order.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t key_hash, std::uint64_t purpose,
                                 std::uint64_t round) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ key_hash);
  h = splitmix64(h ^ purpose);
  return splitmix64(h ^ round);
}

// Portable draws: the standard distributions are implementation-defined,
// these are not, so seeded runs agree across standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_index(rng, i)]);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view key, std::uint64_t purpose,
                                 std::uint64_t round) {
  return stream_seed(seed, fnv1a64(key), purpose, round);
}

inline Rng make_rng(std::uint64_t seed, std::string_view key, std::uint64_t purpose, std::uint64_t round) {
  return Rng(stream_seed(seed, key, purpose, round));
}

// Purpose tags keep the streams of different consumers apart.
enum StreamPurpose : std::uint64_t {
  kNeighborStream = 1,
  kWalkStream = 2,
  kNegativeStream = 3,
  kShuffleStream = 4,
  kInitStream = 5,
  kSplitStream = 6,
  kProbeStream = 7,
  kSynthStream = 8,
};

}  // namespace fang
