#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace quarry {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_utc();

/// RFC 3339 UTC with millisecond precision, e.g. "2024-05-01T12:00:00.000Z".
std::string format_rfc3339(Timestamp t);
std::optional<Timestamp> parse_rfc3339(std::string_view s);

}  // namespace quarry
