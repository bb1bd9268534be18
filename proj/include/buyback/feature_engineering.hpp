#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "buyback/ensembling.hpp"
#include "buyback/model.hpp"

namespace buyback::automl {

using ensemble::ModelFactory;
using learn::ModelPtr;

enum class GoldenOp { Difference, Ratio };

/// Candidate column x[left] - x[right] or x[left] / x[right].
struct GoldenRecipe {
  std::size_t left = 0;
  std::size_t right = 0;
  GoldenOp op = GoldenOp::Difference;
  double loss = 0.0;  // shallow-tree loss that ranked it
};

inline constexpr double kZeroDenominator = 1e-12;
inline constexpr std::size_t kDefaultGoldenKeep = 10;

/// min(ceil(5% of candidates), maxKeep).
std::size_t goldenKeepCount(std::size_t candidates, std::size_t maxKeep);

/// Value of one recipe; ratios with |denominator| < 1e-12 yield 0.
double goldenValue(const GoldenRecipe& recipe, std::span<const double> row, bool* zeroDenominator = nullptr);

struct GoldenResult {
  Matrix augmented;  // input columns followed by the kept candidates
  std::vector<GoldenRecipe> kept;
  std::size_t candidateCount = 0;
  std::size_t zeroDenominators = 0;  // guarded cells across all candidates
};

/// Every unordered pair of `columns` (all columns when empty) yields a
/// difference and a ratio candidate. Each is scored by a depth-3 tree fitted
/// on a seeded half of the rows and evaluated on the other half (log loss or
/// RMSE); the lowest-loss candidates are kept.
GoldenResult goldenFeatures(const Matrix& x, const std::vector<double>& y, TaskKind kind, std::uint64_t seed,
                            std::size_t maxKeep = kDefaultGoldenKeep, std::span<const std::size_t> columns = {});

/// Appends the recipe columns to x; reproduces goldenFeatures' augmentation.
Matrix applyGoldenRecipes(const Matrix& x, std::span<const GoldenRecipe> recipes);

std::string goldenName(const GoldenRecipe& recipe, std::span<const std::string> featureNames);

struct FeatureSelection {
  std::vector<std::size_t> kept;     // input column indices, ascending
  std::vector<std::size_t> dropped;  // input column indices, ascending
  std::vector<double> importance;    // per input column
  double probeImportance = 0.0;
  double fullLoss = 0.0;     // validation loss with every input column
  double reducedLoss = 0.0;  // validation loss after the drop
  bool guardRejected = false;
  bool keptBestOnly = false;
};

inline constexpr double kSelectionGuard = 0.05;

/// Appends a seeded uniform(0, 1) probe, fits `factory` on 75% of the rows and
/// measures permutation importance (mean loss increase over `permutations`
/// shuffles) on the other 25%. Columns no more important than the probe are
/// dropped and the model is refit; a refit loss more than 5% above the
/// full-column loss rejects the drop. The probe never appears in the result.
FeatureSelection selectFeatures(const Matrix& x, const std::vector<double>& y, TaskKind kind,
                                const ModelFactory& factory, std::uint64_t seed, std::size_t permutations = 5);

/// Golden-feature augmentation and column selection in front of a model.
class FeaturePipelineModel final : public learn::Model {
 public:
  FeaturePipelineModel(std::vector<GoldenRecipe> recipes, std::vector<std::size_t> columns, std::size_t inputs,
                       ModelPtr inner);

  std::string typeName() const override { return "featurePipeline"; }
  TaskKind kind() const override { return inner_->kind(); }
  std::size_t inputCount() const override { return inputs_; }
  std::size_t outputCount() const override { return inner_->outputCount(); }
  nlohmann::json toJson() const override;
  static FeaturePipelineModel fromJson(const nlohmann::json& j);

  /// The matrix the inner model sees.
  Matrix transform(const Matrix& x) const;
  const ModelPtr& inner() const { return inner_; }

 protected:
  Matrix predictUnchecked(const Matrix& x) const override;

 private:
  std::vector<GoldenRecipe> recipes_;
  std::vector<std::size_t> columns_;  // of the augmented matrix; empty keeps all
  std::size_t inputs_;
  ModelPtr inner_;
};

}  // namespace buyback::automl
