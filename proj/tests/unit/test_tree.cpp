#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "buyback/io.hpp"
#include "buyback/tree.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace buyback;
using namespace buyback::learn;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Iris {
  Matrix x;
  std::vector<double> y;
};

Iris loadIris() {
  const io::CsvTable table = io::readCsv(std::string(BUYBACK_TEST_DIR) + "/data/iris.csv");
  Iris iris{Matrix(table.rows.size(), 4), {}};
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < 4; ++c) iris.x(r, c) = std::stod(table.rows[r][c]);
    iris.y.push_back(std::stod(table.rows[r][4]));
  }
  return iris;
}

// Small one-feature datasets with repeated x values so ties are exercised.
struct Tiny {
  std::vector<double> x;
  std::vector<double> y;
};

Tiny tinyDataset(std::uint64_t seed, TaskKind kind, std::size_t classes) {
  Rng rng(seed);
  const std::size_t n = 1 + rng.below(6);
  Tiny d;
  for (std::size_t i = 0; i < n; ++i) {
    d.x.push_back(static_cast<double>(rng.below(4)));
    d.y.push_back(kind == TaskKind::Regression ? std::round(rng.normal() * 4.0) / 4.0
                                               : static_cast<double>(rng.below(classes)));
  }
  return d;
}

// A depth-3 regression tree on 8 points.
DecisionTree eightPointTree() {
  const Matrix x = Matrix::fromRows({{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}});
  const std::vector<double> y{0.0, 0.2, 1.0, 1.1, 3.0, 3.4, 3.5, 6.0};
  TreeParams params;
  params.maxDepth = 3;
  return fitTree(x, y, TaskKind::Regression, params);
}

}  // namespace

TEST_SUITE("tree") {
  TEST_CASE("gini impurity examples") {
    CHECK(gini(std::vector<double>{50, 50, 50}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(gini(std::vector<double>{10, 0, 0}) == 0.0);
    CHECK(gini(std::vector<double>{1, 1}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(gini(std::vector<double>{0, 0}), DomainError);
  }

  TEST_CASE("entropy matches the oracle") {
    const std::vector<double> counts{3, 1, 4};
    CHECK(entropy(counts) == doctest::Approx(oracle::entropyOf(counts)).epsilon(1e-12));
    CHECK(entropy(std::vector<double>{5, 0}) == 0.0);
  }

  TEST_CASE("a single sample is a single leaf") {
    const DecisionTree tree = fitTree(Matrix::fromRows({{1.0, 2.0}}), {1.0}, TaskKind::Classification, {}, 2);
    CHECK(tree.leafCount() == 1);
    CHECK(tree.depth() == 0);
    CHECK(tree.nodes()[0].value == std::vector<double>{0.0, 1.0});
  }

  TEST_CASE("iris depth 2 isolates setosa on a petal feature") {
    const Iris iris = loadIris();
    REQUIRE(iris.x.rows() == 150);
    TreeParams params;
    params.maxDepth = 2;
    const DecisionTree tree = fitTree(iris.x, iris.y, TaskKind::Classification, params);
    const TreeNode& root = tree.nodes()[0];
    REQUIRE_FALSE(root.isLeaf());
    CHECK(root.feature >= 2);
    const TreeNode& left = tree.nodes()[static_cast<std::size_t>(root.left)];
    CHECK(left.isLeaf());
    CHECK(left.count == 50);
    CHECK(left.value[0] == 1.0);
    CHECK(tree.depth() == 2);
  }

  TEST_CASE("fitted splits match the exhaustive search") {
    std::size_t checked = 0;
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
      for (TaskKind kind : {TaskKind::Classification, TaskKind::Regression}) {
        for (Impurity impurity : {Impurity::Gini, Impurity::Entropy}) {
          if (kind == TaskKind::Regression && impurity == Impurity::Entropy) continue;
          const Tiny d = tinyDataset(seed, kind, 3);
          TreeParams params;
          params.maxDepth = -1;
          params.impurity = impurity;
          params.minLeaf = 1 + seed % 2;
          const DecisionTree tree = fitTree(Matrix::column(d.x), d.y, kind, params, 3);
          CAPTURE(seed);
          CHECK(oracle::treeMismatches(tree, d.x, d.y, kind, 3, impurity, params.minLeaf) == 0);
          ++checked;
        }
      }
    }
    CHECK(checked == 900);
  }

  TEST_CASE("split thresholds are midpoints between distinct values") {
    const DecisionTree tree =
        fitTree(Matrix::column(std::vector<double>{1.0, 2.0, 4.0, 8.0}), {0, 0, 1, 1}, TaskKind::Classification, {});
    CHECK(tree.nodes()[0].threshold == 3.0);
    CHECK(tree.leafCount() == 2);
  }

  TEST_CASE("minLeaf is respected") {
    const Matrix x = Matrix::column(std::vector<double>{0, 1, 2, 3, 4, 5});
    TreeParams params;
    params.minLeaf = 3;
    const DecisionTree tree = fitTree(x, {0, 1, 0, 1, 1, 1}, TaskKind::Classification, params);
    for (const TreeNode& n : tree.nodes()) CHECK(n.count >= 3);
  }

  TEST_CASE("NaN features are rejected") {
    const Matrix x = Matrix::column(std::vector<double>{0.0, std::nan("")});
    CHECK_THROWS_AS(fitTree(x, {0, 1}, TaskKind::Classification, {}), DataError);
  }

  TEST_CASE("pruning at zero leaves the tree unchanged and infinity gives the root") {
    const DecisionTree tree = eightPointTree();
    REQUIRE(tree.leafCount() > 2);
    CHECK(pruneCostComplexity(tree, 0.0) == tree);
    const DecisionTree root = pruneCostComplexity(tree, kInf);
    CHECK(root.leafCount() == 1);
    CHECK(root.nodes()[0].value == tree.nodes()[0].value);
    CHECK_THROWS_AS(pruneCostComplexity(tree, -1.0), DomainError);
  }

  TEST_CASE("pruned subtrees attain the enumerated optimum") {
    const DecisionTree tree = eightPointTree();
    std::vector<double> alphas{0.0, 0.001, 0.01, 0.05, 0.1, 0.3, 1.0, kInf};
    for (double a : pruningPath(tree)) alphas.push_back(a);
    for (double alpha : alphas) {
      CAPTURE(alpha);
      const DecisionTree pruned = pruneCostComplexity(tree, alpha);
      const oracle::PruneOptimum best = oracle::bestPruning(tree, alpha);
      if (alpha > 0.0) CHECK(pruned.leafCount() == best.leaves);
      if (!std::isinf(alpha)) CHECK(costComplexity(pruned, alpha) == doctest::Approx(best.cost).epsilon(1e-12));
    }
  }

  TEST_CASE("pruning oracle agrees on seeded classification trees") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed);
      Matrix x(12, 2);
      std::vector<double> y;
      for (std::size_t r = 0; r < 12; ++r) {
        x(r, 0) = rng.uniform();
        x(r, 1) = rng.uniform();
        y.push_back(static_cast<double>(rng.below(2)));
      }
      TreeParams params;
      params.maxDepth = 4;
      const DecisionTree tree = fitTree(x, y, TaskKind::Classification, params);
      for (double alpha : {0.0, 0.01, 0.1, 1.0, kInf}) {
        CAPTURE(seed);
        CAPTURE(alpha);
        const DecisionTree pruned = pruneCostComplexity(tree, alpha);
        const oracle::PruneOptimum best = oracle::bestPruning(tree, alpha);
        if (alpha == 0.0) {
          // Zero-gain splits tie at alpha 0; the unpruned tree is the chosen minimizer.
          CHECK(pruned == tree);
          CHECK(costComplexity(pruned, 0.0) == doctest::Approx(best.cost).epsilon(1e-12));
        } else {
          CHECK(pruned.leafCount() == best.leaves);
        }
      }
    }
  }

  TEST_CASE("pruning path is ascending and ends at the root") {
    const DecisionTree tree = eightPointTree();
    const std::vector<double> path = pruningPath(tree);
    REQUIRE_FALSE(path.empty());
    for (std::size_t i = 1; i < path.size(); ++i) CHECK(path[i - 1] <= path[i]);
    CHECK(pruneCostComplexity(tree, path.back() * (1.0 + 1e-9)).leafCount() == 1);
  }

  TEST_CASE("training risk is leaf error over root count") {
    const DecisionTree tree = eightPointTree();
    double errors = 0.0;
    for (const TreeNode& n : tree.nodes()) {
      if (n.isLeaf()) errors += n.error;
    }
    CHECK(tree.trainingRisk() == doctest::Approx(errors / 8.0));
    CHECK(costComplexity(tree, 0.5) ==
          doctest::Approx(tree.trainingRisk() + 0.5 * static_cast<double>(tree.leafCount())));
  }

  TEST_CASE("best-first growth respects maxLeaves") {
    const Iris iris = loadIris();
    TreeParams params;
    params.maxDepth = -1;
    params.maxLeaves = 5;
    const DecisionTree tree = fitTree(iris.x, iris.y, TaskKind::Classification, params);
    CHECK(tree.leafCount() <= 5);
    CHECK(tree.leafCount() >= 3);
  }

  TEST_CASE("oblivious trees share one split per level") {
    const Iris iris = loadIris();
    TreeParams params;
    params.maxDepth = 3;
    params.oblivious = true;
    const DecisionTree tree = fitTree(iris.x, iris.x.columnValues(3), TaskKind::Regression, params);
    std::vector<std::vector<std::pair<int, double>>> byDepth(4);
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      const TreeNode& n = tree.nodes()[static_cast<std::size_t>(i)];
      if (n.isLeaf()) continue;
      byDepth[static_cast<std::size_t>(d)].emplace_back(n.feature, n.threshold);
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
    for (const auto& level : byDepth) {
      for (const auto& s : level) CHECK(s == level.front());
    }
  }

  TEST_CASE("laplace smoothing keeps leaves off zero and one") {
    const Iris iris = loadIris();
    TreeParams params;
    params.maxDepth = 2;
    const DecisionTree tree = fitTree(iris.x, iris.y, TaskKind::Classification, params);
    const DecisionTree smoothed = laplaceSmoothed(tree);
    REQUIRE(smoothed.nodes().size() == tree.nodes().size());
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
      const TreeNode& raw = tree.nodes()[i];
      if (!raw.isLeaf()) continue;
      const double n = static_cast<double>(raw.count);
      double sum = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const double expected = (std::round(raw.value[k] * n) + 1.0) / (n + 3.0);
        CHECK(smoothed.nodes()[i].value[k] == doctest::Approx(expected).epsilon(1e-12));
        sum += smoothed.nodes()[i].value[k];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(smoothed.nodes()[static_cast<std::size_t>(tree.nodes()[0].left)].value[0] == doctest::Approx(51.0 / 53.0));
    const DecisionTree regression = eightPointTree();
    CHECK(laplaceSmoothed(regression) == regression);
  }

  TEST_CASE("json round trip") {
    const DecisionTree tree = eightPointTree();
    CHECK(DecisionTree::fromJson(tree.toJson()) == tree);
  }
}
