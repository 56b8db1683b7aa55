#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace engrank {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;

// Accepts `YYYY-MM-DDTHH:MM[:SS[.fff]]Z`, `YYYY-MM-DD HH:MM:SS` (UTC
// assumed) and bare `YYYY-MM-DD`. Returns nullopt on malformed input.
std::optional<Timestamp> parse_iso8601(std::string_view text);

// Canonical `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(Timestamp t);

// `YYYY-MM-DD` of the UTC day containing t.
std::string format_date(Timestamp t);

struct CivilTime {
  int year;
  unsigned month;
  unsigned day;
  int hour;
  int minute;
  int second;
  int weekday;  // 0 = Monday .. 6 = Sunday
};

CivilTime to_civil(Timestamp t);

}  // namespace engrank
