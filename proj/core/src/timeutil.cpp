#include "engrank/timeutil.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace engrank {
namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  while (!text.empty() && (text.front() == ' ')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ')) text.remove_suffix(1);
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y, mo, d;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;

  int hh = 0, mm = 0, ss = 0;
  std::string_view rest = text.substr(10);
  if (!rest.empty()) {
    if (rest.front() != 'T' && rest.front() != 't' && rest.front() != ' ') {
      return std::nullopt;
    }
    rest.remove_prefix(1);
    if (!rest.empty() && (rest.back() == 'Z' || rest.back() == 'z')) {
      rest.remove_suffix(1);
    } else if (rest.size() > 6 && rest.substr(rest.size() - 6) == "+00:00") {
      rest.remove_suffix(6);
    }
    if (rest.size() < 5 || rest[2] != ':' || !parse_int(rest.substr(0, 2), hh) ||
        !parse_int(rest.substr(3, 2), mm)) {
      return std::nullopt;
    }
    rest.remove_prefix(5);
    if (!rest.empty()) {
      if (rest.size() < 3 || rest[0] != ':' || !parse_int(rest.substr(1, 2), ss)) {
        return std::nullopt;
      }
      rest.remove_prefix(3);
      // Fractional seconds are accepted and truncated.
      if (!rest.empty()) {
        if (rest.front() != '.' || rest.size() < 2) return std::nullopt;
        for (char c : rest.substr(1)) {
          if (c < '0' || c > '9') return std::nullopt;
        }
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  }
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days_since_epoch) * kSecondsPerDay + hh * 3600 +
         mm * 60 + ss;
}

CivilTime to_civil(Timestamp t) {
  using namespace std::chrono;
  std::int64_t day_index = t / kSecondsPerDay;
  std::int64_t secs = t % kSecondsPerDay;
  if (secs < 0) {
    secs += kSecondsPerDay;
    --day_index;
  }
  const sys_days sd{days{day_index}};
  const year_month_day ymd{sd};
  const weekday wd{sd};
  return CivilTime{static_cast<int>(ymd.year()),
                   static_cast<unsigned>(ymd.month()),
                   static_cast<unsigned>(ymd.day()),
                   static_cast<int>(secs / 3600),
                   static_cast<int>((secs % 3600) / 60),
                   static_cast<int>(secs % 60),
                   static_cast<int>(wd.iso_encoding()) - 1};
}

std::string format_iso8601(Timestamp t) {
  const CivilTime c = to_civil(t);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", c.year, c.month,
                c.day, c.hour, c.minute, c.second);
  return buf;
}

std::string format_date(Timestamp t) {
  const CivilTime c = to_civil(t);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
  return buf;
}

}  // namespace engrank
