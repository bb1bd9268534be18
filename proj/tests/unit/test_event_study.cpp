#include <algorithm>
#include <cmath>

#include "buyback/event_study.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace buyback;
using namespace buyback::event;

namespace {

PriceSeries series(std::vector<std::pair<const char*, double>> points) {
  std::vector<PricePoint> out;
  for (auto [d, c] : points) out.push_back({parseDate(d), c});
  return PriceSeries("X", std::move(out));
}

// Independent percentile: sort, then interpolate at rank p * (n - 1).
double oraclePercentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double rank = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TEST_SUITE("event_study") {
  TEST_CASE("horizon return examples") {
    const auto s = series({{"2021-01-04", 100.0}, {"2021-01-11", 115.0}, {"2021-02-04", 7.0}});
    CHECK(*horizonReturn(s, parseDate("2021-01-04"), TimeFrame::W1) == doctest::Approx(0.15));
    CHECK(*horizonReturn(s, parseDate("2021-01-04"), TimeFrame::M1) == doctest::Approx(-0.93));
    CHECK_FALSE(horizonReturn(s, parseDate("2021-01-04"), TimeFrame::M6).has_value());
  }

  TEST_CASE("anchors use the last close at or before each date") {
    // Weekend announcement anchors on Friday's close.
    const auto s = series({{"2021-01-08", 50.0}, {"2021-01-15", 55.0}, {"2021-01-18", 60.0}});
    CHECK(*horizonReturn(s, parseDate("2021-01-10"), TimeFrame::W1) == doctest::Approx(0.1));
  }

  TEST_CASE("stale anchors are missing") {
    const auto s = series({{"2021-01-01", 100.0}, {"2021-03-01", 120.0}});
    CHECK_FALSE(horizonReturn(s, parseDate("2021-01-20"), TimeFrame::M1).has_value());
    CHECK_FALSE(horizonReturn(s, parseDate("2020-12-01"), TimeFrame::W1).has_value());
  }

  TEST_CASE("price series validation") {
    CHECK_THROWS_AS(series({{"2021-01-02", 1.0}, {"2021-01-01", 1.0}}), DataError);
    CHECK_THROWS_AS(series({{"2021-01-01", 0.0}}), DataError);
  }

  TEST_CASE("price csv round trip") {
    testing::TempDir dir("event");
    const auto s = series({{"2021-01-04", 100.25}, {"2021-01-05", 101.5}});
    writePriceCsv(dir / "p.csv", s);
    const auto back = readPriceCsv(dir / "p.csv", "X");
    REQUIRE(back.points().size() == 2);
    CHECK(back.points()[1].close == 101.5);
    CHECK(back.points()[0].date == parseDate("2021-01-04"));
  }

  TEST_CASE("overperformance examples") {
    CHECK(overperformance(0.15, 0.10) == doctest::Approx(0.05));
    CHECK(overperformance(0.3, 0.3) == 0.0);
    CHECK(overperformance(-0.93, 0.60) == doctest::Approx(-1.53));
  }

  TEST_CASE("annualization") {
    CHECK(annualize(0.0797, TimeFrame::M6) == doctest::Approx(std::pow(1.0797, 2.0) - 1.0));
    CHECK(std::abs(annualize(0.0797, TimeFrame::M6) - 0.1657) <= 0.005);
    CHECK(annualize(0.0165, TimeFrame::W1) == doctest::Approx(std::pow(1.0165, 52.0) - 1.0));
    CHECK(std::abs(annualize(0.0165, TimeFrame::W1) - 1.3437) <= 0.005);
    CHECK(std::abs(annualize(0.0238, TimeFrame::M1) - 0.3268) <= 0.005);
    for (double r : {-0.5, -0.3, 0.0, 0.07, 0.123, 2.0}) {
      CHECK(annualize(r, TimeFrame::Y1) == r);
      CHECK(deannualize(annualize(r, TimeFrame::Y5), TimeFrame::Y5) == doctest::Approx(r));
    }
    CHECK_THROWS_AS(annualize(-1.0, TimeFrame::M1), DomainError);
  }

  TEST_CASE("market cap classes") {
    CHECK(classifyMarketCap(0.0) == MarketCapClass::Nano);
    CHECK(classifyMarketCap(49'999'999.0) == MarketCapClass::Nano);
    CHECK(classifyMarketCap(50'000'000.0) == MarketCapClass::Micro);
    CHECK(classifyMarketCap(300'000'000.0) == MarketCapClass::Small);
    CHECK(classifyMarketCap(2e9) == MarketCapClass::Mid);
    CHECK(classifyMarketCap(10e9) == MarketCapClass::Large);
    CHECK(classifyMarketCap(250'700'000'000.0) == MarketCapClass::Mega);
    CHECK_THROWS(classifyMarketCap(-1.0));
  }

  TEST_CASE("summary examples") {
    const std::vector<double> flat{0.1, 0.1, 0.1};
    const HorizonStats s = summarize(flat, TimeFrame::M1);
    CHECK(s.count == 3);
    CHECK(s.mean == doctest::Approx(0.1));
    CHECK(s.standardDeviation == doctest::Approx(0.0));
    CHECK(s.percentile25 == doctest::Approx(0.1));
    CHECK(s.median == doctest::Approx(0.1));
    CHECK(s.percentile75 == doctest::Approx(0.1));
    const HorizonStats sym = summarize(std::vector<double>{-0.1, 0.0, 0.1}, TimeFrame::M1);
    CHECK(sym.mean == doctest::Approx(0.0));
    CHECK(sym.median == 0.0);
    CHECK_THROWS_AS(summarize(std::vector<double>{}, TimeFrame::M1), DataError);
  }

  TEST_CASE("summary matches an independent recomputation") {
    Rng rng(2024);
    std::vector<double> v(1000);
    for (double& x : v) x = rng.normal(0.02, 0.1);
    const HorizonStats s = summarize(v, TimeFrame::M6);
    long double acc = 0.0L;
    for (double x : v) acc += x;
    const double mean = static_cast<double>(acc / v.size());
    long double sq = 0.0L;
    for (double x : v) sq += (x - mean) * (x - mean);
    const double sd = std::sqrt(static_cast<double>(sq / (v.size() - 1)));
    CHECK(std::abs(s.mean - mean) < 1e-12);
    CHECK(std::abs(s.standardDeviation - sd) < 1e-12);
    CHECK(std::abs(s.percentile25 - oraclePercentile(v, 0.25)) < 1e-12);
    CHECK(std::abs(s.median - oraclePercentile(v, 0.5)) < 1e-12);
    CHECK(std::abs(s.percentile75 - oraclePercentile(v, 0.75)) < 1e-12);
  }

  TEST_CASE("annualized summary for short and long frames") {
    const std::vector<double> v{0.01, 0.02, 0.03};
    const auto shortFrame = annualizedSummary(v, TimeFrame::M1);
    CHECK(shortFrame.mean == doctest::Approx(std::pow(1.02, 12.0) - 1.0));
    CHECK(shortFrame.median == doctest::Approx(std::pow(1.02, 12.0) - 1.0));
    const std::vector<double> w{0.21, 0.44, 1.25};
    const auto longFrame = annualizedSummary(w, TimeFrame::Y2);
    CHECK(longFrame.mean == doctest::Approx((0.1 + 0.2 + 0.5) / 3.0));
    CHECK(longFrame.median == doctest::Approx(0.2));
  }

  TEST_CASE("regime split") {
    const std::vector<RegimeSample> allBear{{30, 0.1}, {30, 0.2}};
    const auto a = regimeSplit(allBear, TimeFrame::M1, 25.0);
    CHECK(a.bear.has_value());
    CHECK_FALSE(a.bull.has_value());
    CHECK_FALSE(a.deltaMean.has_value());

    const std::vector<RegimeSample> one{{30, 0.2}, {20, 0.05}};
    const auto b = regimeSplit(one, TimeFrame::M1, 25.0);
    CHECK(*b.deltaMean == doctest::Approx(0.15));
    CHECK(*b.deltaMedian == doctest::Approx(0.15));

    // Threshold itself counts as bull.
    const std::vector<RegimeSample> edge{{25, 0.1}};
    CHECK(regimeSplit(edge, TimeFrame::M1, 25.0).bull.has_value());
  }

  TEST_CASE("regime delta matches direct side means") {
    Rng rng(77);
    std::vector<RegimeSample> samples;
    std::vector<double> bear;
    std::vector<double> bull;
    for (int i = 0; i < 500; ++i) {
      const double vix = rng.uniform(10.0, 45.0);
      const double value = rng.normal(vix > 25.0 ? -0.01 : 0.02, 0.05);
      samples.push_back({vix, value});
      (vix > 25.0 ? bear : bull).push_back(value);
    }
    const auto split = regimeSplit(samples, TimeFrame::M1, 25.0);
    double bearMean = 0.0;
    for (double x : bear) bearMean += x;
    bearMean /= static_cast<double>(bear.size());
    double bullMean = 0.0;
    for (double x : bull) bullMean += x;
    bullMean /= static_cast<double>(bull.size());
    CHECK(split.bear->count == bear.size());
    CHECK(*split.deltaMean == doctest::Approx(bearMean - bullMean).epsilon(1e-12));
    CHECK(*split.deltaMedian ==
          doctest::Approx(oraclePercentile(bear, 0.5) - oraclePercentile(bull, 0.5)).epsilon(1e-12));
  }
}
