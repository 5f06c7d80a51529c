#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cacophony {

using Duration = std::chrono::milliseconds;
using Timestamp = std::chrono::sys_time<Duration>;

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff]Z`. Fractional digits beyond
/// milliseconds are rejected so that formatting is lossless.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Inverse of parse_iso8601; the fraction is emitted only when non-zero.
std::string format_iso8601(Timestamp ts);

/// Floors `ts` onto the epoch-aligned grid of width `dt`.
Timestamp floor_to_grid(Timestamp ts, Duration dt);

/// Days since 1970-01-01 (UTC calendar date of the instant).
std::int64_t utc_day(Timestamp ts);

inline double to_seconds(Duration d) {
  return std::chrono::duration<double>(d).count();
}

}  // namespace cacophony
