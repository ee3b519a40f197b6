#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cdbench {

// splitmix64 finalizer, used to decorrelate structured seed material.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over bytes; stable across platforms.
inline std::uint64_t hash_bytes(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stable child-stream key for (seed, purpose tag, index).
//
// Every independent random consumer (per-node noise, per-node mechanism,
// per-pair confounder coin, ...) gets its own stream so that toggling one
// generator knob never shifts the draws of unrelated components.
inline std::uint64_t stream_key(std::uint64_t seed, std::string_view tag,
                                std::uint64_t index = 0) {
  return mix64(mix64(seed ^ hash_bytes(tag)) ^ mix64(index ^ 0x51b365f7c2a4a04dULL));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(stream_key(seed, tag, index));
}

}  // namespace cdbench
