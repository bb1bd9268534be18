#include <cmath>

#include "buyback/common.hpp"
#include "buyback/dates.hpp"
#include "doctest.h"

using namespace buyback;
using namespace std::chrono;

TEST_SUITE("dates") {
  TEST_CASE("date round trip") {
    const Date d = parseDate("2020-02-29");
    CHECK(formatDate(d) == "2020-02-29");
    CHECK_THROWS_AS(parseDate("2021-02-29"), DataError);
    CHECK_THROWS_AS(parseDate("2021-13-01"), DataError);
    CHECK_THROWS_AS(parseDate("20210101"), DataError);
  }

  TEST_CASE("timestamps normalize to UTC") {
    CHECK(formatTimestamp(parseTimestamp("2021-03-04T09:30:00Z")) == "2021-03-04T09:30:00Z");
    CHECK(formatTimestamp(parseTimestamp("2021-03-04T09:30:00+02:00")) == "2021-03-04T07:30:00Z");
    CHECK(formatTimestamp(parseTimestamp("2021-03-04T09:30:00.250Z")) == "2021-03-04T09:30:00Z");
    CHECK(dateOf(parseTimestamp("2021-03-04T23:59:59Z")) == parseDate("2021-03-04"));
    CHECK_THROWS_AS(parseTimestamp("2021-03-04 09:30"), DataError);
  }

  TEST_CASE("month arithmetic clamps to month end") {
    CHECK(addMonths(parseDate("2021-01-31"), 1) == parseDate("2021-02-28"));
    CHECK(addMonths(parseDate("2020-01-31"), 1) == parseDate("2020-02-29"));
    CHECK(addMonths(parseDate("2021-08-31"), 6) == parseDate("2022-02-28"));
    CHECK(addYears(parseDate("2020-02-29"), 1) == parseDate("2021-02-28"));
  }

  TEST_CASE("frame offsets") {
    const Date d = parseDate("2021-01-15");
    CHECK(addFrame(d, TimeFrame::W1) == parseDate("2021-01-22"));
    CHECK(addFrame(d, TimeFrame::M1) == parseDate("2021-02-15"));
    CHECK(addFrame(d, TimeFrame::M6) == parseDate("2021-07-15"));
    CHECK(addFrame(d, TimeFrame::Y1) == parseDate("2022-01-15"));
    CHECK(addFrame(d, TimeFrame::Y2) == parseDate("2023-01-15"));
    CHECK(addFrame(d, TimeFrame::Y5) == parseDate("2026-01-15"));
  }

  TEST_CASE("frame labels and periods") {
    for (TimeFrame f : kAllFrames) CHECK(parseFrame(frameLabel(f)) == f);
    CHECK(frameLabel(TimeFrame::M6) == "6M");
    CHECK(periodsPerYear(TimeFrame::W1) == 52.0);
    CHECK(periodsPerYear(TimeFrame::M1) == 12.0);
    CHECK(periodsPerYear(TimeFrame::Y5) == doctest::Approx(0.2));
    CHECK_THROWS(parseFrame("3M"));
  }
}
