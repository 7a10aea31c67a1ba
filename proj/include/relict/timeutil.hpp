#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace relict {

using Clock = std::chrono::system_clock;
using Timestamp = std::chrono::time_point<Clock, std::chrono::seconds>;

Timestamp now_seconds();

// ISO-8601 UTC, e.g. "2009-11-02T14:05:00Z".
std::string format_iso8601(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SSZ". Throws relict::Error otherwise.
Timestamp parse_iso8601(std::string_view s);

}  // namespace relict
