#include <algorithm>
#include <set>
#include <vector>

#include "buyback/backtest.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace buyback;
using namespace buyback::backtest;

namespace {

TestRow row(std::string id, double stock, double bench) {
  TestRow r;
  r.id = std::move(id);
  for (std::size_t f = 0; f < 6; ++f) {
    r.stockReturn[f] = stock;
    r.benchmarkReturn[f] = bench;
  }
  return r;
}

struct Scenario {
  std::vector<TestRow> rows;
  GateSignals signals;
};

// Seeded rows with occasional missing returns and random gate signals.
Scenario scenario(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  Scenario s;
  for (std::size_t i = 0; i < n; ++i) {
    TestRow r;
    r.id = "A" + std::to_string(i);
    std::array<bool, 6> sig{};
    for (std::size_t f = 0; f < 6; ++f) {
      if (rng.uniform() > 0.1) {
        r.stockReturn[f] = rng.normal(0.01, 0.1);
        r.benchmarkReturn[f] = rng.normal(0.005, 0.05);
      }
      sig[f] = rng.uniform() < 0.6;
    }
    s.rows.push_back(std::move(r));
    s.signals.push_back(sig);
  }
  return s;
}

std::vector<ComboResult> allResults(const Scenario& s) {
  std::vector<ComboResult> out;
  for (const StrategyCombo& c : enumerateCombos().combos) out.push_back({c, runCombo(s.rows, s.signals, c)});
  return out;
}

}  // namespace

TEST_SUITE("backtest") {
  TEST_CASE("gate signal examples") {
    CHECK(gateSignal({1, 1, 0.0, 0.02}));
    CHECK_FALSE(gateSignal({1, 0, 0.01, 0.02}));
    CHECK_FALSE(gateSignal({1, 1, -0.001, 0.02}));
    CHECK_FALSE(gateSignal({1, 1, 0.01, std::nullopt}));
    CHECK_FALSE(gateSignal({}));
  }

  TEST_CASE("sharpe ratio from reported moments") {
    CHECK(std::abs(*sharpeFromMoments(0.0137, 0.0759) - 0.1805) < 0.001);
    CHECK(std::abs(*sharpeFromMoments(0.0299, 0.07718) - 0.3874) < 0.001);
    CHECK_FALSE(sharpeFromMoments(0.01, 0.0));
  }

  TEST_CASE("sharpe ratio uses the sample deviation") {
    const std::vector<double> e{0.1, -0.1, 0.2};
    const double mean = 0.2 / 3.0;
    const double var = ((0.1 - mean) * (0.1 - mean) + (-0.1 - mean) * (-0.1 - mean) + (0.2 - mean) * (0.2 - mean)) / 2.0;
    CHECK(*sharpe(e) == doctest::Approx(mean / std::sqrt(var)).epsilon(1e-12));
    CHECK_FALSE(sharpe(std::vector<double>{0.1}));
    CHECK_FALSE(sharpe(std::vector<double>{0.1, 0.1}));
  }

  TEST_CASE("value at risk interpolates the fifth percentile") {
    std::vector<double> values;
    for (int i = 0; i <= 100; ++i) values.push_back(-1.0 + 0.01 * i);
    std::reverse(values.begin(), values.end());
    CHECK(valueAtRisk(values) == doctest::Approx(-0.95).epsilon(1e-12));
    CHECK(valueAtRisk(std::vector<double>(7, 0.03)) == doctest::Approx(0.03));
    CHECK_THROWS_AS(valueAtRisk(std::vector<double>{}), DataError);
  }

  TEST_CASE("naive strategy over three announcements") {
    const std::vector<TestRow> rows{row("a", 0.1, 0.0), row("b", -0.1, 0.0), row("c", 0.2, 0.0)};
    const BacktestStats s = runNaive(rows, TimeFrame::M1);
    CHECK(s.trades == 3);
    CHECK(s.mean == doctest::Approx(0.2 / 3.0));
    CHECK(s.median == doctest::Approx(0.1));
    CHECK(s.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(s.sum == doctest::Approx(0.2));
    CHECK(s.std == doctest::Approx(std::sqrt(((0.1 - s.mean) * (0.1 - s.mean) + (-0.1 - s.mean) * (-0.1 - s.mean) +
                                              (0.2 - s.mean) * (0.2 - s.mean)) /
                                             2.0)));
    CHECK(*s.sharpe == doctest::Approx(s.mean / s.std));
  }

  TEST_CASE("empty inputs are data errors") {
    CHECK_THROWS_AS(runNaive(std::vector<TestRow>{}, TimeFrame::W1), DataError);
    CHECK_THROWS_AS(computeStats(std::vector<TradeRecord>{}), DataError);
    TestRow missing;
    missing.id = "m";
    CHECK_THROWS_AS(runNaive(std::vector<TestRow>{missing}, TimeFrame::W1), DataError);
  }

  TEST_CASE("six to the seventh tuples collapse to 378 combos") {
    const ComboEnumeration e = enumerateCombos();
    CHECK(e.rawCount == 279936);
    CHECK(e.combos.size() == 378);
    std::set<std::pair<int, int>> unique;
    for (const StrategyCombo& c : e.combos) {
      CHECK(c.gating != 0);
      CHECK(c.gating < 64);
      unique.insert({c.gating, static_cast<int>(c.target)});
    }
    CHECK(unique.size() == 378);
    for (std::size_t i = 1; i < e.combos.size(); ++i) {
      if (e.combos[i].target == e.combos[i - 1].target) CHECK(gatingOrder(e.combos[i - 1], e.combos[i]));
    }
  }

  TEST_CASE("combo labels and ordering") {
    const StrategyCombo c{0b001111, TimeFrame::M1};
    CHECK(c.build() == "1W 1M 6M 1Y");
    CHECK(c.gateCount() == 4);
    CHECK(gatingOrder({0b100000, TimeFrame::W1}, {0b000011, TimeFrame::W1}));
    CHECK(gatingOrder({0b000101, TimeFrame::W1}, {0b000110, TimeFrame::W1}));
  }

  TEST_CASE("gating on the target frame alone trades its signals") {
    const Scenario s = scenario(3, 50);
    for (TimeFrame f : kAllFrames) {
      const StrategyCombo c{static_cast<std::uint8_t>(1U << frameIndex(f)), f};
      for (std::size_t r : comboTrades(s.rows, s.signals, c)) {
        CHECK(s.signals[r][frameIndex(f)]);
        CHECK(s.rows[r].hasReturn(f));
      }
    }
  }

  TEST_CASE("a signal set no row fully satisfies yields zero trades for all six gates") {
    Scenario s = scenario(4, 30);
    for (std::size_t r = 0; r < s.signals.size(); ++r) {
      s.signals[r].fill(true);
      s.signals[r][r % 6] = false;
    }
    const StrategyCombo all{0b111111, TimeFrame::Y1};
    CHECK(comboTrades(s.rows, s.signals, all).empty());
    CHECK_FALSE(runCombo(s.rows, s.signals, all).has_value());
  }

  TEST_CASE("adding a gate never adds trades") {
    const Scenario s = scenario(5, 100);
    for (const StrategyCombo& c : enumerateCombos().combos) {
      const auto base = comboTrades(s.rows, s.signals, c);
      for (std::size_t f = 0; f < 6; ++f) {
        if ((c.gating >> f) & 1U) continue;
        const StrategyCombo wider{static_cast<std::uint8_t>(c.gating | (1U << f)), c.target};
        const auto narrowed = comboTrades(s.rows, s.signals, wider);
        CHECK(std::includes(base.begin(), base.end(), narrowed.begin(), narrowed.end()));
      }
    }
  }

  TEST_CASE("the optimizer agrees with brute force") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Scenario s = scenario(seed, 40);
      const std::vector<ComboResult> results = allResults(s);
      for (Criterion criterion : {Criterion::Sharpe, Criterion::ValueAtRisk}) {
        const auto brute = oracle::bruteForceBest(s.rows, s.signals, criterion);
        const std::vector<BestCombo> best = optimizeStrategies(results, criterion);
        REQUIRE(best.size() == 6);
        for (const BestCombo& b : best) {
          const oracle::ComboBest& expected = brute.at(b.target);
          CAPTURE(seed);
          CAPTURE(frameLabel(b.target));
          REQUIRE(b.best.has_value() == expected.score.has_value());
          if (!b.best) continue;
          CHECK(b.best->combo.gating == expected.gating);
          const auto& st = *b.best->stats;
          const double got = criterion == Criterion::Sharpe ? *st.sharpe : st.valueAtRisk;
          CHECK(got == doctest::Approx(*expected.score).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("report rows leave missing stats empty") {
    CHECK(reportHeader().size() == 10);
    const auto empty = reportRow(TimeFrame::M1, "1W", std::nullopt);
    REQUIRE(empty.size() == 10);
    CHECK(empty[0] == "1M");
    CHECK(empty[2] == "0");
    CHECK(empty[3].empty());
  }
}
