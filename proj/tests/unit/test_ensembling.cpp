#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "buyback/ensembling.hpp"
#include "buyback/linear.hpp"
#include "buyback/tree.hpp"
#include "doctest.h"

using namespace buyback;
using namespace buyback::ensemble;

namespace {

Candidate regressionCandidate(std::string id, std::vector<double> predictions) {
  return {std::move(id), nullptr, Matrix::column(predictions), false};
}

Candidate probabilityCandidate(std::string id, const std::vector<double>& p1) {
  Matrix m(p1.size(), 2);
  for (std::size_t r = 0; r < p1.size(); ++r) {
    m(r, 0) = 1.0 - p1[r];
    m(r, 1) = p1[r];
  }
  return {std::move(id), nullptr, m, false};
}

// Per-row weighted average of the chosen candidates, recomputed directly.
Matrix weightedAverage(const std::vector<Candidate>& pool, const Selection& sel) {
  const Matrix& shape = pool.front().selectionPredictions;
  Matrix out(shape.rows(), shape.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < sel.members.size(); ++i) {
    total += sel.weights[i];
    const Matrix& p = pool[sel.members[i]].selectionPredictions;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += sel.weights[i] * p(r, c);
    }
  }
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (double& v : out.row(r)) v /= total;
  }
  return out;
}

ModelFactory leastSquares() {
  return [](const Matrix& x, const std::vector<double>& y, std::uint64_t) {
    return std::make_shared<learn::LinearModel>(learn::fitLeastSquares(x, y));
  };
}

}  // namespace

TEST_SUITE("ensembling") {
  TEST_CASE("a single candidate is selected with weight one") {
    const std::vector<Candidate> pool{regressionCandidate("a", {1.0, 2.0, 3.0})};
    const Selection sel = ensembleSelect(pool, {1.0, 2.5, 3.0}, Metric::Rmse);
    CHECK(sel.members == std::vector<std::size_t>{0});
    CHECK(sel.weights == std::vector<int>{1});
    CHECK(sel.metric == sel.bestSingleMetric);
  }

  TEST_CASE("anti-correlated errors are both kept") {
    const std::vector<double> y{1.0, -2.0, 0.5, 4.0};
    std::vector<double> up;
    std::vector<double> down;
    for (double v : y) {
      up.push_back(v + 0.5);
      down.push_back(v - 0.5);
    }
    const std::vector<Candidate> pool{regressionCandidate("up", up), regressionCandidate("down", down)};
    const Selection sel = ensembleSelect(pool, y, Metric::Rmse);
    CHECK(sel.members.size() == 2);
    CHECK(sel.weights[0] == sel.weights[1]);
    CHECK(sel.metric == doctest::Approx(0.0));
    CHECK(sel.bestSingleMetric == doctest::Approx(0.5));
  }

  TEST_CASE("a uniformly worse copy is rejected") {
    const std::vector<double> y{0.0, 1.0, 2.0, 3.0};
    const std::vector<Candidate> pool{regressionCandidate("near", {0.1, 1.1, 2.1, 3.1}),
                                      regressionCandidate("far", {0.3, 1.3, 2.3, 3.3})};
    const Selection sel = ensembleSelect(pool, y, Metric::Rmse);
    CHECK(sel.members == std::vector<std::size_t>{0});
    CHECK(sel.metric == doctest::Approx(0.1));
  }

  TEST_CASE("an identical duplicate is rejected") {
    const std::vector<Candidate> pool{probabilityCandidate("a", {0.8, 0.3, 0.6}),
                                      probabilityCandidate("b", {0.8, 0.3, 0.6})};
    CHECK(ensembleSelect(pool, {1.0, 0.0, 1.0}, Metric::LogLoss).members.size() == 1);
  }

  TEST_CASE("random pools never lose to their best member and report the blended metric") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      Rng rng(seed);
      const std::size_t n = 5 + rng.below(30);
      std::vector<double> labels;
      for (std::size_t r = 0; r < n; ++r) labels.push_back(static_cast<double>(rng.below(2)));
      std::vector<Candidate> pool;
      const std::size_t size = 1 + rng.below(8);
      for (std::size_t c = 0; c < size; ++c) {
        std::vector<double> p;
        for (std::size_t r = 0; r < n; ++r) p.push_back(rng.uniform(0.01, 0.99));
        pool.push_back(probabilityCandidate("c" + std::to_string(c), p));
      }
      const Selection sel = ensembleSelect(pool, labels, Metric::LogLoss);
      double best = std::numeric_limits<double>::infinity();
      for (const Candidate& c : pool) best = std::min(best, metricValue(Metric::LogLoss, c.selectionPredictions, labels));
      CAPTURE(seed);
      CHECK(sel.bestSingleMetric == best);
      CHECK(sel.metric <= best);
      const Matrix blended = weightedAverage(pool, sel);
      CHECK(metricValue(Metric::LogLoss, blended, labels) == doctest::Approx(sel.metric).epsilon(1e-12));
      CHECK(std::set<std::size_t>(sel.members.begin(), sel.members.end()).size() == sel.members.size());
      for (int w : sel.weights) CHECK((w >= 1 && w <= kMaxMemberWeight));
    }
  }

  TEST_CASE("the ensemble model reproduces the selection blend") {
    const Matrix x = Matrix::column(std::vector<double>{0, 1, 2, 3, 4, 5});
    const std::vector<double> y{0.1, 0.9, 2.2, 2.8, 4.1, 5.0};
    learn::TreeParams params;
    params.maxDepth = 1;
    auto stump = std::make_shared<learn::DecisionTree>(learn::fitTree(x, y, TaskKind::Regression, params));
    auto line = std::make_shared<learn::LinearModel>(learn::fitLeastSquares(x, y));
    const std::vector<Candidate> pool{{"stump", stump, stump->predict(x), false}, {"line", line, line->predict(x), false}};
    const Selection sel = ensembleSelect(pool, y, Metric::Rmse);
    REQUIRE(sel.model);
    const Matrix p = sel.model->predict(x);
    for (std::size_t r = 0; r < 6; ++r) CHECK(p(r, 0) == doctest::Approx(sel.predictions(r, 0)).epsilon(1e-12));
  }

  TEST_CASE("k-fold assignment is balanced and validated") {
    const std::vector<std::size_t> fold = kFoldAssignment(10, 3, 4);
    std::vector<std::size_t> sizes(3, 0);
    for (std::size_t f : fold) ++sizes[f];
    CHECK(sizes == std::vector<std::size_t>{4, 3, 3});
    CHECK(kFoldAssignment(10, 3, 4) == fold);
    CHECK_THROWS_AS(kFoldAssignment(10, 1, 0), ConfigError);
    CHECK_THROWS_AS(kFoldAssignment(3, 4, 0), DataError);
  }

  TEST_CASE("stacking audit: every row is predicted once by a model that never saw it") {
    Rng rng(8);
    for (std::size_t k : {2U, 5U, 10U}) {
      Matrix x(40, 2);
      std::vector<double> y;
      for (std::size_t r = 0; r < 40; ++r) {
        x(r, 0) = rng.normal();
        x(r, 1) = rng.normal();
        y.push_back(x(r, 0) + rng.normal(0.0, 0.1));
      }
      const StackFit fit = fitStacked(x, y, TaskKind::Regression, leastSquares(), leastSquares(), k, 3);
      REQUIRE(fit.audit.size() == k);
      std::vector<int> predictedCount(40, 0);
      for (const FoldAudit& a : fit.audit) {
        const std::set<std::size_t> train(a.trainRows.begin(), a.trainRows.end());
        for (std::size_t r : a.predictedRows) {
          CHECK(train.count(r) == 0);
          ++predictedCount[r];
        }
        CHECK(a.trainRows.size() + a.predictedRows.size() == 40);
      }
      for (int c : predictedCount) CHECK(c == 1);
      CHECK(fit.outOfFold.rows() == 40);
      CHECK(fit.outOfFold.cols() == 1);
    }
  }

  TEST_CASE("two folds over four rows") {
    const Matrix x = Matrix::column(std::vector<double>{0, 1, 2, 3});
    const StackFit fit = fitStacked(x, {1, 3, 5, 7}, TaskKind::Regression, leastSquares(), leastSquares(), 2, 1);
    REQUIRE(fit.audit.size() == 2);
    for (const FoldAudit& a : fit.audit) {
      CHECK(a.trainRows.size() == 2);
      CHECK(a.predictedRows.size() == 2);
    }
  }

  TEST_CASE("a perfect level-0 predictor passes through stacking") {
    std::vector<double> xs;
    std::vector<double> y;
    for (int i = 0; i < 12; ++i) {
      xs.push_back(i * 0.5);
      y.push_back(3.0 * xs.back() + 1.0);
    }
    const Matrix x = Matrix::column(xs);
    const StackFit fit = fitStacked(x, y, TaskKind::Regression, leastSquares(), leastSquares(), 3, 2);
    for (std::size_t r = 0; r < y.size(); ++r) CHECK(std::abs(fit.outOfFold(r, 0) - y[r]) < 1e-8);
    const Matrix p = fit.model->predict(x);
    for (std::size_t r = 0; r < y.size(); ++r) CHECK(std::abs(p(r, 0) - y[r]) < 1e-6);
  }

  TEST_CASE("binary classifiers append only the positive-class probability") {
    const Matrix p = Matrix::fromRows({{0.7, 0.3}, {0.2, 0.8}});
    CHECK(appendedColumns(p, TaskKind::Classification) == Matrix::column(std::vector<double>{0.3, 0.8}));
    CHECK(appendedColumns(Matrix::column(std::vector<double>{1.5}), TaskKind::Regression).cols() == 1);
  }

  TEST_CASE("a pool of one is returned without stacking") {
    std::vector<Candidate> pool{regressionCandidate("only", {1.0, 2.0})};
    bool called = false;
    const Selection sel = ensembleStack(
        pool, 1,
        [&](std::size_t) {
          called = true;
          return pool.front();
        },
        {1.0, 2.0}, Metric::Rmse);
    CHECK_FALSE(called);
    CHECK(pool.size() == 1);
    CHECK(sel.members == std::vector<std::size_t>{0});
  }

  TEST_CASE("stacked candidates join the pool and selection still beats every member") {
    std::vector<Candidate> pool{regressionCandidate("a", {0.0, 1.2, 2.0}), regressionCandidate("b", {0.3, 0.8, 2.4}),
                                regressionCandidate("c", {1.0, 1.0, 1.0})};
    const std::vector<double> y{0.1, 1.0, 2.1};
    const Selection sel = ensembleStack(
        pool, 2, [&](std::size_t i) { return regressionCandidate(pool[i].id + "-stacked", y); }, y, Metric::Rmse);
    CHECK(pool.size() == 5);
    CHECK(pool[3].stacked);
    CHECK(sel.metric == doctest::Approx(0.0));
  }
}
