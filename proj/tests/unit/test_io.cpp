#include <cmath>
#include <limits>
#include <sstream>

#include "buyback/common.hpp"
#include "buyback/io.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace buyback;

TEST_SUITE("io") {
  TEST_CASE("csv quoting round trip") {
    io::CsvTable t;
    t.header = {"a", "b"};
    t.rows = {{"plain", "has,comma"}, {"has \"quote\"", ""}, {"multi\nline", "x"}};
    std::ostringstream out;
    io::writeCsv(out, t);
    std::istringstream in(out.str());
    const io::CsvTable back = io::parseCsv(in);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK(back.columnIndex("b") == 1);
    CHECK_THROWS_AS(back.columnIndex("c"), DataError);
  }

  TEST_CASE("ragged rows are rejected by validation") {
    testing::TempDir dir("io");
    io::writeText(dir / "t.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(io::validateCsv(dir / "t.csv", {"a", "b"}), DataError);
    io::writeText(dir / "u.csv", "a,b\n1,2\n");
    CHECK_NOTHROW(io::validateCsv(dir / "u.csv", {"a", "b"}));
    CHECK_THROWS_AS(io::validateCsv(dir / "u.csv", {"a", "c"}), DataError);
  }

  TEST_CASE("numbers round trip exactly") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) {
      CHECK(io::parseNumber(io::formatNumber(v)) == v);
    }
    CHECK(io::formatNumber(std::numeric_limits<double>::quiet_NaN()).empty());
    CHECK(std::isnan(io::parseNumber("")));
    CHECK(std::isnan(io::parseNumber("NA")));
    CHECK(io::formatFixed(0.1234567, 4) == "0.1235");
    CHECK_THROWS_AS(io::parseNumber("abc"), DataError);
  }

  TEST_CASE("jsonl round trip skips blank lines") {
    testing::TempDir dir("io");
    io::writeJsonl(dir / "x.jsonl", {{{"a", 1}}, {{"b", "two"}}});
    io::writeText(dir / "y.jsonl", io::readText(dir / "x.jsonl") + "\n\n");
    const auto back = io::readJsonl(dir / "y.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[1].at("b") == "two");
    io::writeText(dir / "bad.jsonl", "{\"a\": 1}\n{oops\n");
    CHECK_THROWS_AS(io::readJsonl(dir / "bad.jsonl"), DataError);
  }
}
