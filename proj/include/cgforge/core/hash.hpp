#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cgforge {

// 64-bit FNV-1a. Stable across platforms and runs; used for template
// hashes and content-addressed candidate ids.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value);

inline std::string stable_hash(std::string_view data) { return to_hex(fnv1a64(data)); }

}  // namespace cgforge
