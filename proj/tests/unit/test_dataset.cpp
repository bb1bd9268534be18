#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "buyback/dataset.hpp"
#include "doctest.h"

using namespace buyback;
using namespace buyback::data;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FeatureTable requiredTable(std::vector<double> ebit) {
  FeatureTable t;
  const std::size_t n = ebit.size();
  t.addCategorical("announcementId", [&] {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("A" + std::to_string(i));
    return ids;
  }());
  t.addNumeric("marketCap", std::vector<double>(n, 100.0));
  t.addNumeric("lastSalePrice", std::vector<double>(n, 10.0));
  t.addNumeric("totalEnterpriseValue", std::vector<double>(n, 120.0));
  t.addNumeric("ebit", std::move(ebit));
  return t;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("min-info filter") {
    const FilterResult r = filterMinInfo(requiredTable({1.0, kNaN, 3.0}));
    CHECK(r.dropped == 1);
    REQUIRE(r.table.rowCount() == 2);
    CHECK(r.table.column("announcementId").text == std::vector<std::string>{"A0", "A2"});
    CHECK(filterMinInfo(requiredTable({})).table.rowCount() == 0);
    CHECK(filterMinInfo(requiredTable({std::numeric_limits<double>::infinity()})).dropped == 1);
  }

  TEST_CASE("percentile trimming") {
    std::vector<double> seq;
    for (int i = 1; i <= 100; ++i) seq.push_back(i);
    const TrimResult r = trimPercentiles(seq);
    // p1 = 1.99 and p99 = 99.01 on 1..100, so exactly 1 and 100 fall outside.
    CHECK(r.lowerBound == doctest::Approx(1.99));
    CHECK(r.upperBound == doctest::Approx(99.01));
    CHECK(r.keptRows.size() == 98);
    CHECK(std::find(r.keptRows.begin(), r.keptRows.end(), 0) == r.keptRows.end());

    const std::vector<double> same(50, 0.3);
    CHECK(trimPercentiles(same).keptRows.size() == 50);

    Rng rng(1);
    std::vector<double> draws(1000);
    for (double& x : draws) x = rng.normal();
    draws[10] = 40.0;
    draws[500] = -40.0;
    const TrimResult g = trimPercentiles(draws);
    CHECK(std::find(g.keptRows.begin(), g.keptRows.end(), 10) == g.keptRows.end());
    CHECK(std::find(g.keptRows.begin(), g.keptRows.end(), 500) == g.keptRows.end());
    CHECK_THROWS_AS(trimPercentiles(std::vector<double>{1.0, 2.0}), DataError);
  }

  TEST_CASE("labels") {
    FeatureTable t;
    t.addNumeric(targetColumn(Target::Performance, TimeFrame::M1), {0.0, -0.01, 0.2, kNaN});
    const Labels cls = makeLabels(t, TaskSpec{TimeFrame::M1, Target::Performance, TaskKind::Classification});
    CHECK(cls.values == std::vector<double>{1.0, 0.0, 1.0});
    CHECK(cls.excluded == 1);
    const Labels reg = makeLabels(t, TaskSpec{TimeFrame::M1, Target::Performance, TaskKind::Regression});
    REQUIRE(reg.transform.has_value());
    for (double v : {0.0, -0.01, 0.2, 17.5}) {
      CHECK(std::abs(reg.transform->inverse(reg.transform->forward(v)) - v) < 1e-12);
    }
    CHECK(stats::mean(reg.values) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("split sizes") {
    const Split s = splitTrainTest(10, 0.8, 42);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);
    const Split big = splitTrainTest(51357, 0.8, 42);
    CHECK(big.train.size() == 41086);
    CHECK(big.test.size() == 10271);
  }

  TEST_CASE("split is a seeded partition") {
    const Split a = splitTrainTest(200, 0.8, 42);
    const Split b = splitTrainTest(200, 0.8, 42);
    const Split c = splitTrainTest(200, 0.8, 43);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.test != c.test);
    std::set<std::size_t> all(a.train.begin(), a.train.end());
    all.insert(a.test.begin(), a.test.end());
    CHECK(all.size() == 200);
    CHECK_THROWS_AS(splitTrainTest(10, 1.0, 1), ConfigError);
  }

  TEST_CASE("standardizer") {
    FeatureTable t;
    t.addNumeric("x", {1.0, 2.0, 3.0});
    t.addNumeric("flat", {5.0, 5.0, 5.0});
    t.addNumeric("gappy", {1.0, kNaN, 3.0});
    t.addCategorical("country", {"DE", "US", "US"});
    const Standardizer s = Standardizer::fit(t, {"x", "flat", "gappy", "country"});
    const FeatureTable z = s.apply(t);
    const auto& x = z.column("x").numeric;
    CHECK(stats::mean(x) == doctest::Approx(0.0));
    CHECK(stats::populationStd(x) == doctest::Approx(1.0));
    CHECK(z.column("flat").numeric == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(s.constantColumns() == std::vector<std::string>{"flat"});
    CHECK(z.column("country").text == t.column("country").text);
    CHECK(s.missingReport().at("gappy") == 1);
    // Median imputation puts the gap at the column centre.
    CHECK(z.column("gappy").numeric[1] == doctest::Approx(0.0));

    const Matrix m = s.design(t);
    CHECK(m.cols() == 4);
    // US is most frequent (code 0), DE second (code 1 / 2).
    CHECK(m(0, 3) == doctest::Approx(0.5));
    CHECK(m(1, 3) == 0.0);

    FeatureTable unseen;
    unseen.addNumeric("x", {2.0});
    unseen.addNumeric("flat", {5.0});
    unseen.addNumeric("gappy", {2.0});
    unseen.addCategorical("country", {"FR"});
    CHECK(s.design(unseen)(0, 3) == 1.0);

    const Standardizer back = Standardizer::fromJson(s.toJson());
    CHECK(back.design(t) == m);
  }

  TEST_CASE("task names") {
    const auto tasks = allTasks();
    CHECK(tasks.size() == 24);
    std::set<std::string> names;
    for (const auto& t : tasks) {
      names.insert(t.name());
      CHECK(TaskSpec::parse(t.name()) == t);
    }
    CHECK(names.size() == 24);
    CHECK(tasks[0].name() == "class-perf-1W");
    CHECK(TaskSpec::parse("reg-over-5Y").kind == TaskKind::Regression);
    CHECK_THROWS_AS(TaskSpec::parse("class-perf-3M"), ConfigError);
  }

  TEST_CASE("feature columns exclude ids and outcomes") {
    FeatureTable t;
    t.addCategorical("announcementId", {"a"});
    t.addCategorical("split", {"train"});
    t.addNumeric("marketCap", {1.0});
    t.addNumeric("performance_1M", {0.1});
    t.addNumeric("benchmark_1M", {0.05});
    t.addNumeric("overperformance_1M", {0.05});
    t.addCategorical("country", {"US"});
    CHECK(featureColumns(t) == std::vector<std::string>{"marketCap", "country"});
  }

  TEST_CASE("task data keeps test rows and fits on train rows only") {
    FeatureTable t;
    Rng rng(3);
    std::vector<double> f;
    std::vector<double> y;
    std::vector<std::string> ids;
    for (int i = 0; i < 40; ++i) {
      f.push_back(rng.normal());
      y.push_back(i % 7 == 0 ? kNaN : rng.normal(0.01, 0.05));
      ids.push_back("A" + std::to_string(i));
    }
    t.addCategorical("announcementId", ids);
    t.addNumeric("f", f);
    t.addNumeric("performance_1M", y);
    const Split split = splitTrainTest(40, 0.8, 1);
    const TaskData d = buildTaskData(t, TaskSpec::parse("reg-perf-1M"), split);
    CHECK(d.testX.rows() == split.test.size());
    CHECK(d.trainX.rows() == d.trainY.size());
    for (std::size_t r : d.trainRows) {
      CHECK(std::find(split.train.begin(), split.train.end(), r) != split.train.end());
    }
    std::size_t missing = 0;
    for (std::size_t i = 0; i < split.test.size(); ++i) missing += std::isnan(d.testY[i]) ? 1 : 0;
    std::size_t expected = 0;
    for (std::size_t r : split.test) expected += std::isnan(y[r]) ? 1 : 0;
    CHECK(missing == expected);
  }

  TEST_CASE("csv round trip keeps kinds") {
    FeatureTable t;
    t.addCategorical("announcementId", {"a", "b"});
    t.addCategorical("country", {"US", ""});
    t.addNumeric("marketCap", {1.5, kNaN});
    const auto text = textColumns();
    const FeatureTable back = FeatureTable::fromCsv(t.toCsv(), text);
    CHECK(back.column("country").kind == ColumnKind::Categorical);
    CHECK(back.column("marketCap").numeric[0] == 1.5);
    CHECK(std::isnan(back.column("marketCap").numeric[1]));
  }
}
