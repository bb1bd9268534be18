#pragma once

#include <array>
#include <chrono>
#include <string>
#include <string_view>

namespace buyback {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DD`. Throws DataError on malformed or invalid dates.
Date parseDate(std::string_view text);
std::string formatDate(Date date);

/// Parses an RFC 3339 date-time (`2021-03-04T09:30:00Z`, optional fraction,
/// `Z` or `+hh:mm` offset) into UTC.
Timestamp parseTimestamp(std::string_view text);
std::string formatTimestamp(Timestamp ts);

inline Date dateOf(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }

/// Calendar-month addition clamped to the last day of the target month.
Date addMonths(Date date, int months);
Date addYears(Date date, int years);

/// Post-announcement horizons.
enum class TimeFrame { W1, M1, M6, Y1, Y2, Y5 };

inline constexpr std::array<TimeFrame, 6> kAllFrames{TimeFrame::W1, TimeFrame::M1, TimeFrame::M6,
                                                     TimeFrame::Y1, TimeFrame::Y2, TimeFrame::Y5};

inline constexpr std::size_t frameIndex(TimeFrame f) { return static_cast<std::size_t>(f); }

/// Horizon periods per year: 52, 12, 2, 1, 1/2, 1/5.
double periodsPerYear(TimeFrame frame);
/// Short label used in files and reports: 1W 1M 6M 1Y 2Y 5Y.
std::string_view frameLabel(TimeFrame frame);
std::string_view frameLongLabel(TimeFrame frame);
TimeFrame parseFrame(std::string_view label);
/// Announcement date plus the frame's calendar offset.
Date addFrame(Date date, TimeFrame frame);

}  // namespace buyback
