#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "buyback/tree.hpp"

namespace buyback::learn {

enum class BoostLoss { SquaredError, LogLoss };

enum class GrowthPolicy {
  LevelWise,  // depth-first to maxDepth
  LeafWise,   // best-first to maxLeaves
  Symmetric,  // oblivious levels
};

struct BoostParams {
  std::size_t nRounds = 100;
  int maxDepth = 3;
  std::size_t maxLeaves = 0;  // used by LeafWise
  std::size_t minLeaf = 5;
  GrowthPolicy growth = GrowthPolicy::LevelWise;
  BoostLoss loss = BoostLoss::SquaredError;
  double shrinkage = 0.1;
  /// Row fraction per round, drawn without replacement; 1 uses every row.
  double subsample = 1.0;
  std::uint64_t seed = 0;
};

/// Presets standing in for three common boosted-tree libraries.
BoostParams levelWisePreset();
BoostParams leafWisePreset();
BoostParams symmetricPreset();

/// Loss per sample averaged over the batch. Log loss takes raw scores (logits).
double boostLoss(BoostLoss loss, std::span<const double> y, std::span<const double> scores);
/// dL_i/dscore_i of the per-sample loss. Squared error: -2(y - score).
std::vector<double> lossGradient(BoostLoss loss, std::span<const double> y, std::span<const double> scores);

/// Golden-section minimizer of f on [lo, hi]; returns 0 instead when f(0) is
/// no worse than the located minimum.
double goldenSectionSearch(const std::function<double(double)>& f, double lo, double hi, int iterations);

/// F(x) = f1(x) + sum_m gamma_m f_m(x). Classification outputs
/// [1 - sigmoid(F), sigmoid(F)].
class BoostedModel final : public Model {
 public:
  struct Stage {
    DecisionTree learner;
    double multiplier = 1.0;
  };

  BoostedModel(TaskKind kind, BoostLoss loss, GrowthPolicy growth, std::vector<Stage> stages);

  std::string typeName() const override;
  TaskKind kind() const override { return kind_; }
  std::size_t inputCount() const override { return stages_.front().learner.inputCount(); }
  std::size_t outputCount() const override { return kind_ == TaskKind::Regression ? 1 : 2; }
  nlohmann::json toJson() const override;
  static BoostedModel fromJson(const nlohmann::json& j);

  const std::vector<Stage>& stages() const { return stages_; }
  BoostLoss loss() const { return loss_; }
  /// Additive score F(x) before any link function.
  std::vector<double> rawScores(const Matrix& x) const;

  /// Training loss after each stage (filled by fitBoosted).
  std::vector<double> lossHistory;

 protected:
  Matrix predictUnchecked(const Matrix& x) const override;

 private:
  TaskKind kind_;
  BoostLoss loss_;
  GrowthPolicy growth_;
  std::vector<Stage> stages_;
};

/// Binary classification takes labels in {0, 1} with LogLoss; regression uses
/// SquaredError. Stops early once every gradient is zero or `control` expires.
BoostedModel fitBoosted(const Matrix& x, const std::vector<double>& y, TaskKind kind, const BoostParams& params,
                        const FitControl& control = {});

}  // namespace buyback::learn
