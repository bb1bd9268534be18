#include <algorithm>
#include <cmath>
#include <numeric>

#include "buyback/common.hpp"
#include "doctest.h"

using namespace buyback;

TEST_SUITE("common") {
  TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(7);
    Rng b(7);
    Rng c(8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next();
      CHECK(x == b.next());
      differs = differs || x != c.next();
    }
    CHECK(differs);
    CHECK(deriveSeed(1, 2) == deriveSeed(1, 2));
    CHECK(deriveSeed(1, 2) != deriveSeed(1, 3));
    CHECK(deriveSeed(1, 2) != deriveSeed(2, 2));
  }

  TEST_CASE("uniform and below stay in range") {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
      const double u = rng.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(rng.below(7) < 7);
    }
  }

  TEST_CASE("below is roughly uniform") {
    Rng rng(11);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 50000; ++i) ++counts[rng.below(5)];
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  }

  TEST_CASE("normal draws have unit moments") {
    Rng rng(5);
    std::vector<double> v(20000);
    for (double& x : v) x = rng.normal();
    CHECK(std::abs(stats::mean(v)) < 0.03);
    CHECK(std::abs(stats::sampleStd(v) - 1.0) < 0.03);
  }

  TEST_CASE("shuffle is a permutation") {
    Rng rng(9);
    auto v = iota(50);
    rng.shuffle(v);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == iota(50));
    CHECK(v != iota(50));
  }

  TEST_CASE("stats match direct formulas") {
    const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    CHECK(stats::sum(v) == doctest::Approx(10.0));
    CHECK(stats::mean(v) == doctest::Approx(2.5));
    CHECK(stats::sampleStd(v) == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(stats::populationStd(v) == doctest::Approx(std::sqrt(1.25)));
    CHECK(stats::median(v) == doctest::Approx(2.5));
    // Linear interpolation at rank p * (n - 1) over the sorted values.
    CHECK(stats::percentile(v, 0.25) == doctest::Approx(1.75));
    CHECK(stats::percentile(v, 0.0) == 1.0);
    CHECK(stats::percentile(v, 1.0) == 4.0);
    CHECK(stats::sampleStd(std::vector<double>{3.0}) == 0.0);
  }

  TEST_CASE("compensated sum keeps small terms") {
    std::vector<double> v{1e16, 1.0, -1e16};
    CHECK(stats::sum(v) == 1.0);
  }

  TEST_CASE("matrix helpers") {
    const Matrix m = Matrix::fromRows({{1, 2, 3}, {4, 5, 6}});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.columnValues(1) == std::vector<double>{2, 5});
    const std::vector<std::size_t> rows{1};
    CHECK(m.selectRows(rows) == Matrix::fromRows({{4, 5, 6}}));
    const std::vector<std::size_t> cols{2, 0};
    CHECK(m.selectColumns(cols) == Matrix::fromRows({{3, 1}, {6, 4}}));
    CHECK(m.hconcat(Matrix::fromRows({{7}, {8}})) == Matrix::fromRows({{1, 2, 3, 7}, {4, 5, 6, 8}}));
    CHECK_THROWS(m.hconcat(Matrix(3, 1)));
  }
}
