#include <vector>

#include "buyback/linear.hpp"
#include "doctest.h"

using namespace buyback;
using namespace buyback::learn;

TEST_SUITE("linear") {
  TEST_CASE("baseline predicts the mean or the most frequent class") {
    const Matrix x(3, 2);
    const BaselineModel reg = fitBaseline(x, {1.0, 2.0, 3.0}, TaskKind::Regression);
    CHECK(reg.predict(x)(1, 0) == 2.0);
    const BaselineModel cls = fitBaseline(x, {1.0, 1.0, 0.0}, TaskKind::Classification);
    CHECK(pointPredictions(cls.predict(x), TaskKind::Classification) == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(cls.output()[1] == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("least squares recovers an exact line") {
    std::vector<double> xs;
    std::vector<double> y;
    for (int i = 0; i < 10; ++i) {
      xs.push_back(0.5 * i - 2.0);
      y.push_back(3.0 * xs.back() + 1.0);
    }
    const LinearModel model = fitLeastSquares(Matrix::column(xs), y);
    CHECK(std::abs(model.weights()[0] - 3.0) < 1e-8);
    CHECK(std::abs(model.intercept() - 1.0) < 1e-8);
    CHECK_FALSE(model.ridgeFallback);
  }

  TEST_CASE("duplicated columns fall back to ridge") {
    const Matrix x = Matrix::fromRows({{1, 1}, {2, 2}, {3, 3}, {4, 4}});
    const LinearModel model = fitLeastSquares(x, {2, 4, 6, 8});
    CHECK(model.ridgeFallback);
    const Matrix p = model.predict(x);
    for (std::size_t r = 0; r < 4; ++r) CHECK(p(r, 0) == doctest::Approx(2.0 * static_cast<double>(r + 1)).epsilon(1e-6));
  }

  TEST_CASE("logistic regression separates a shifted threshold") {
    Rng rng(3);
    Matrix x(200, 1);
    std::vector<double> y;
    for (std::size_t r = 0; r < 200; ++r) {
      x(r, 0) = rng.uniform(-2.0, 2.0);
      y.push_back(x(r, 0) > 0.5 ? 1.0 : 0.0);
    }
    const LinearModel model = fitLogistic(x, y, {2000, 1.0, 0.0});
    CHECK(model.weights()[0] > 0.0);
    CHECK(-model.intercept() / model.weights()[0] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(taskAccuracy(model.predict(x), y, TaskKind::Classification) > 0.95);
  }

  TEST_CASE("json round trip") {
    const LinearModel model(TaskKind::Classification, 0.25, {1.0, -2.0});
    const LinearModel back = LinearModel::fromJson(model.toJson());
    const Matrix x = Matrix::fromRows({{0.1, 0.2}, {3.0, -1.0}});
    CHECK(back.predict(x) == model.predict(x));
  }
}
