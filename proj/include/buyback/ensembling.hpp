#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "buyback/model.hpp"

namespace buyback::ensemble {

using learn::Model;
using learn::ModelPtr;

enum class Metric { LogLoss, Rmse };

Metric metricFor(TaskKind kind);
/// Log loss (clipped) over probability columns, or RMSE over column 0.
double metricValue(Metric metric, const Matrix& predictions, const std::vector<double>& labels);

/// Weight-normalized average of member outputs.
class EnsembleModel final : public Model {
 public:
  struct Member {
    std::string id;
    ModelPtr model;
    int weight = 1;
    bool stacked = false;
  };

  EnsembleModel(TaskKind kind, std::vector<Member> members);

  std::string typeName() const override { return "ensemble"; }
  TaskKind kind() const override { return kind_; }
  std::size_t inputCount() const override { return members_.front().model->inputCount(); }
  std::size_t outputCount() const override { return members_.front().model->outputCount(); }
  nlohmann::json toJson() const override;
  static EnsembleModel fromJson(const nlohmann::json& j);

  const std::vector<Member>& members() const { return members_; }

 protected:
  Matrix predictUnchecked(const Matrix& x) const override;

 private:
  TaskKind kind_;
  std::vector<Member> members_;
};

/// A fitted model with its predictions on the selection rows.
struct Candidate {
  std::string id;
  ModelPtr model;
  Matrix selectionPredictions;
  bool stacked = false;
};

struct Selection {
  std::shared_ptr<const EnsembleModel> model;
  std::vector<std::size_t> members;  // candidate indices, in acceptance order
  std::vector<int> weights;
  double metric = 0.0;
  double bestSingleMetric = 0.0;
  Matrix predictions;  // ensemble output on the selection rows
};

inline constexpr int kMaxMemberWeight = 9;

/// Forward-stepwise selection without replacement, then greedy integer
/// weights in 1..9. Every accepted step strictly improves the metric.
Selection ensembleSelect(std::span<const Candidate> candidates, const std::vector<double>& labels, Metric metric);

/// Fold index per row: a seeded shuffle dealt round-robin into k folds.
/// Throws ConfigError for k < 2 and DataError for k > rows.
std::vector<std::size_t> kFoldAssignment(std::size_t rows, std::size_t k, std::uint64_t seed);

using ModelFactory =
    std::function<ModelPtr(const Matrix& x, const std::vector<double>& y, std::uint64_t seed)>;

/// Level-1 model over [features | level-0 predictions]. Inference uses a
/// level-0 model refit on all training rows.
class StackedModel final : public Model {
 public:
  StackedModel(TaskKind kind, ModelPtr level0, ModelPtr level1);

  std::string typeName() const override { return "stacked"; }
  TaskKind kind() const override { return kind_; }
  std::size_t inputCount() const override { return level0_->inputCount(); }
  std::size_t outputCount() const override { return level1_->outputCount(); }
  nlohmann::json toJson() const override;
  static StackedModel fromJson(const nlohmann::json& j);

  const ModelPtr& level0() const { return level0_; }
  const ModelPtr& level1() const { return level1_; }

 protected:
  Matrix predictUnchecked(const Matrix& x) const override;

 private:
  TaskKind kind_;
  ModelPtr level0_;
  ModelPtr level1_;
};

/// Columns appended for level 1: P(class 1) for binary classifiers, the
/// prediction for regressors, every probability otherwise.
Matrix appendedColumns(const Matrix& level0Predictions, TaskKind kind);

/// Which rows trained the level-0 model whose predictions fill `predictedRows`.
struct FoldAudit {
  std::size_t fold = 0;
  std::vector<std::size_t> trainRows;
  std::vector<std::size_t> predictedRows;
};

struct StackFit {
  std::shared_ptr<const StackedModel> model;
  Matrix outOfFold;  // level-0 predictions appended to each training row
  std::vector<FoldAudit> audit;
};

StackFit fitStacked(const Matrix& x, const std::vector<double>& y, TaskKind kind, const ModelFactory& level0,
                    const ModelFactory& level1, std::size_t k, std::uint64_t seed);

/// Builds a stacked candidate (with selection predictions) from candidate i.
using StackBuilder = std::function<Candidate(std::size_t candidateIndex)>;

/// Stacks the best `bestN` candidates, adds them to the pool and reruns
/// selection over the enlarged pool. A pool of one is returned as is.
Selection ensembleStack(std::vector<Candidate>& pool, std::size_t bestN, const StackBuilder& stack,
                        const std::vector<double>& labels, Metric metric);

}  // namespace buyback::ensemble
