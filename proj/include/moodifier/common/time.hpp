#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace moodifier {

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

// Accepts "YYYY-MM-DDTHH:MM:SSZ" with an optional fractional second part
// (truncated). Throws Error(InvalidArgument) on anything else.
Timestamp parse_timestamp(std::string_view text);

// Always emits "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);

Timestamp utc_now();

constexpr Seconds days(int n) { return Seconds{86400LL * n}; }

}  // namespace moodifier
