#include "buyback/dates.hpp"

#include <charconv>
#include <cstdio>

#include "buyback/common.hpp"

namespace buyback {

namespace {

int parseFixed(std::string_view text, std::size_t pos, std::size_t width, std::string_view whole) {
  int value = 0;
  if (pos + width > text.size()) throw DataError("truncated date/time: '" + std::string(whole) + "'");
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + width, value);
  if (ec != std::errc() || ptr != first + width) {
    throw DataError("malformed date/time: '" + std::string(whole) + "'");
  }
  return value;
}

void expectChar(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) throw DataError("malformed date/time: '" + std::string(whole) + "'");
}

Date makeDate(int y, int m, int d, std::string_view whole) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw DataError("invalid calendar date: '" + std::string(whole) + "'");
  return sys_days{ymd};
}

}  // namespace

Date parseDate(std::string_view text) {
  if (text.size() != 10) throw DataError("malformed date: '" + std::string(text) + "'");
  expectChar(text, 4, '-', text);
  expectChar(text, 7, '-', text);
  return makeDate(parseFixed(text, 0, 4, text), parseFixed(text, 5, 2, text), parseFixed(text, 8, 2, text), text);
}

std::string formatDate(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

Timestamp parseTimestamp(std::string_view text) {
  using namespace std::chrono;
  if (text.size() < 20) throw DataError("malformed timestamp: '" + std::string(text) + "'");
  const Date date = parseDate(text.substr(0, 10));
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') {
    throw DataError("malformed timestamp: '" + std::string(text) + "'");
  }
  const int hh = parseFixed(text, 11, 2, text);
  expectChar(text, 13, ':', text);
  const int mm = parseFixed(text, 14, 2, text);
  expectChar(text, 16, ':', text);
  const int ss = parseFixed(text, 17, 2, text);
  if (hh > 23 || mm > 59 || ss > 60) throw DataError("time out of range: '" + std::string(text) + "'");
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  int offsetSeconds = 0;
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '+' ? 1 : -1;
    const int oh = parseFixed(text, pos + 1, 2, text);
    expectChar(text, pos + 3, ':', text);
    const int om = parseFixed(text, pos + 4, 2, text);
    offsetSeconds = sign * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    throw DataError("timestamp lacks a UTC offset: '" + std::string(text) + "'");
  }
  if (pos != text.size()) throw DataError("trailing characters in timestamp: '" + std::string(text) + "'");
  return Timestamp{date.time_since_epoch()} + hours{hh} + minutes{mm} + seconds{ss} - seconds{offsetSeconds};
}

std::string formatTimestamp(Timestamp ts) {
  using namespace std::chrono;
  const Date day = dateOf(ts);
  const auto rem = ts - Timestamp{day.time_since_epoch()};
  const auto h = duration_cast<hours>(rem);
  const auto m = duration_cast<minutes>(rem - h);
  const auto s = duration_cast<seconds>(rem - h - m);
  char buf[32];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(h.count()), static_cast<int>(m.count()),
                static_cast<int>(s.count()));
  return formatDate(day) + buf;
}

Date addMonths(Date date, int months) {
  using namespace std::chrono;
  const year_month_day ymd{date};
  const year_month ym = year_month{ymd.year(), ymd.month()} + std::chrono::months{months};
  const day last = year_month_day_last{ym.year(), month_day_last{ym.month()}}.day();
  return sys_days{year_month_day{ym.year(), ym.month(), std::min(ymd.day(), last)}};
}

Date addYears(Date date, int years) { return addMonths(date, 12 * years); }

double periodsPerYear(TimeFrame frame) {
  switch (frame) {
    case TimeFrame::W1: return 52.0;
    case TimeFrame::M1: return 12.0;
    case TimeFrame::M6: return 2.0;
    case TimeFrame::Y1: return 1.0;
    case TimeFrame::Y2: return 1.0 / 2.0;
    case TimeFrame::Y5: return 1.0 / 5.0;
  }
  throw DomainError("unknown time frame");
}

std::string_view frameLabel(TimeFrame frame) {
  static constexpr std::array<std::string_view, 6> labels{"1W", "1M", "6M", "1Y", "2Y", "5Y"};
  return labels[frameIndex(frame)];
}

std::string_view frameLongLabel(TimeFrame frame) {
  static constexpr std::array<std::string_view, 6> labels{"1 Week", "1 Month", "6 Months",
                                                          "1 Year", "2 Years", "5 Years"};
  return labels[frameIndex(frame)];
}

TimeFrame parseFrame(std::string_view label) {
  for (TimeFrame f : kAllFrames) {
    if (frameLabel(f) == label) return f;
  }
  throw ConfigError("unknown time frame '" + std::string(label) + "' (expected 1W 1M 6M 1Y 2Y 5Y)");
}

Date addFrame(Date date, TimeFrame frame) {
  switch (frame) {
    case TimeFrame::W1: return date + std::chrono::days{7};
    case TimeFrame::M1: return addMonths(date, 1);
    case TimeFrame::M6: return addMonths(date, 6);
    case TimeFrame::Y1: return addYears(date, 1);
    case TimeFrame::Y2: return addYears(date, 2);
    case TimeFrame::Y5: return addYears(date, 5);
  }
  throw DomainError("unknown time frame");
}

}  // namespace buyback
