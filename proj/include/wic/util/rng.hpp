#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wic {

using Rng = std::mt19937_64;

// splitmix64 finaliser; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Child generator for a named stream, so that adding a stream never shifts
// the draws of another.
inline Rng split_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(mix_seed(seed ^ fnv1a(stream)));
}

}  // namespace wic
