#include "relict/timeutil.hpp"

#include <ctime>

#include <fmt/format.h>

#include "relict/error.hpp"

namespace relict {

Timestamp now_seconds() {
  return std::chrono::time_point_cast<std::chrono::seconds>(Clock::now());
}

std::string format_iso8601(Timestamp t) {
  const std::time_t secs = Clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", tm.tm_year + 1900,
                     tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
}

Timestamp parse_iso8601(std::string_view s) {
  std::tm tm{};
  int consumed = 0;
  const std::string buf(s);
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%n", &tm.tm_year, &tm.tm_mon,
                  &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &consumed) != 6 ||
      consumed != static_cast<int>(buf.size())) {
    throw Error(fmt::format("invalid ISO-8601 timestamp '{}'", s));
  }
  if (tm.tm_mon < 1 || tm.tm_mon > 12 || tm.tm_mday < 1 || tm.tm_mday > 31 ||
      tm.tm_hour > 23 || tm.tm_min > 59 || tm.tm_sec > 60) {
    throw Error(fmt::format("timestamp out of range '{}'", s));
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return Timestamp(std::chrono::seconds(timegm(&tm)));
}

}  // namespace relict
