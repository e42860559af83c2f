// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ledgerwatch/model.hpp"

namespace ledgerwatch {

/// Parses "500ms", "15s", "30m", "2h", "7d" or a bare millisecond count.
std::optional<DurationMs> parse_duration(std::string_view text);

/// Renders a duration with the largest unit that divides it, e.g. "2h", "90s".
std::string format_duration(DurationMs duration);

/// Floor to a multiple of width (epoch-aligned), correct for negative values.
constexpr TimestampMs align_down(TimestampMs t, DurationMs width) {
  const auto r = t % width;
  return r < 0 ? t - r - width : t - r;
}

constexpr TimestampMs align_up(TimestampMs t, DurationMs width) {
  const auto down = align_down(t, width);
  return down == t ? t : down + width;
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// splitmix64 finalizer; derives independent RNG seeds from one master seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string to_hex(std::uint64_t value);

}  // namespace ledgerwatch
