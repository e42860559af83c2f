// SPDX-License-Identifier: Apache-2.0
#include "ledgerwatch/util.hpp"

#include <charconv>
#include <cstdio>
#include <limits>

namespace ledgerwatch {

std::optional<DurationMs> parse_duration(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t number = 0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, number);
  if (ec != std::errc{} || ptr == begin || number < 0) return std::nullopt;

  const std::string_view unit(ptr, static_cast<std::size_t>(end - ptr));
  DurationMs scale = 0;
  if (unit.empty() || unit == "ms") {
    scale = 1;
  } else if (unit == "s") {
    scale = kSecond;
  } else if (unit == "m" || unit == "min") {
    scale = kMinute;
  } else if (unit == "h") {
    scale = kHour;
  } else if (unit == "d") {
    scale = kDay;
  } else {
    return std::nullopt;
  }
  if (number > std::numeric_limits<DurationMs>::max() / scale) return std::nullopt;
  return number * scale;
}

std::string format_duration(DurationMs duration) {
  struct Unit {
    DurationMs width;
    const char* suffix;
  };
  constexpr Unit units[] = {{kDay, "d"}, {kHour, "h"}, {kMinute, "m"}, {kSecond, "s"}};
  if (duration != 0) {
    for (const auto& u : units) {
      if (duration % u.width == 0) return std::to_string(duration / u.width) + u.suffix;
    }
  }
  return std::to_string(duration) + "ms";
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace ledgerwatch
