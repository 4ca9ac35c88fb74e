#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace emotrack {

// UTC instant with millisecond precision.
struct Timestamp {
  std::int64_t ms = 0;  // since 1970-01-01T00:00:00Z

  static constexpr Timestamp from_seconds(std::int64_t s) { return Timestamp{s * 1000}; }

  friend auto operator<=>(Timestamp, Timestamp) = default;
};

inline constexpr std::int64_t kMsPerSecond = 1000;
inline constexpr std::int64_t kMsPerHour = 3600 * kMsPerSecond;
inline constexpr std::int64_t kMsPerDay = 24 * kMsPerHour;
inline constexpr std::int64_t kMsPerWeek = 7 * kMsPerDay;

// "2021-03-02T10:15:00.000Z". Always millisecond precision, always Z.
std::string format_rfc3339(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff...]" followed by "Z" or "+HH:MM"/"-HH:MM",
// and a bare date "YYYY-MM-DD" (midnight UTC).
std::optional<Timestamp> parse_rfc3339(std::string_view text);

// Floor division that rounds towards negative infinity.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

using Clock = std::function<Timestamp()>;

Timestamp system_now();
Clock system_clock();

}  // namespace emotrack
