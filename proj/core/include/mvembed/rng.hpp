#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mvembed {

// splitmix64, used to mix seeds and tags into independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic stream derivation: every consumer of randomness names its
// stream by (seed, tag, indices...) so results are independent of scheduling
// and of which other components draw randomness.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view tag) {
  return std::mt19937_64(hash_combine(seed, hash_tag(tag)));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t a) {
  return std::mt19937_64(hash_combine(hash_combine(seed, hash_tag(tag)), a));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t a, std::uint64_t b) {
  return std::mt19937_64(
      hash_combine(hash_combine(hash_combine(seed, hash_tag(tag)), a), b));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t a, std::uint64_t b,
                                   std::uint64_t c) {
  return std::mt19937_64(hash_combine(
      hash_combine(hash_combine(hash_combine(seed, hash_tag(tag)), a), b), c));
}

// Unbiased-enough uniform index in [0, n); avoids distribution objects so the
// draw sequence is pinned by the engine alone.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

// Uniform double in [0, 1) with 53 bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

}  // namespace mvembed
