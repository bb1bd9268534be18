#pragma once

#include <vector>

#include "buyback/model.hpp"

namespace buyback::learn {

/// Constant predictor: label mean for regression, class priors for
/// classification (so the argmax is the most frequent label).
class BaselineModel final : public Model {
 public:
  BaselineModel(TaskKind kind, std::size_t inputs, std::vector<double> output);

  std::string typeName() const override { return "baseline"; }
  TaskKind kind() const override { return kind_; }
  std::size_t inputCount() const override { return inputs_; }
  std::size_t outputCount() const override { return output_.size(); }
  nlohmann::json toJson() const override;
  static BaselineModel fromJson(const nlohmann::json& j);

  const std::vector<double>& output() const { return output_; }

 protected:
  Matrix predictUnchecked(const Matrix& x) const override;

 private:
  TaskKind kind_;
  std::size_t inputs_;
  std::vector<double> output_;
};

BaselineModel fitBaseline(const Matrix& x, const std::vector<double>& y, TaskKind kind);

/// Affine model intercept + w.x. Classification applies a sigmoid and outputs
/// [1 - p, p].
class LinearModel final : public Model {
 public:
  LinearModel(TaskKind kind, double intercept, std::vector<double> weights);

  std::string typeName() const override { return "linear"; }
  TaskKind kind() const override { return kind_; }
  std::size_t inputCount() const override { return weights_.size(); }
  std::size_t outputCount() const override { return kind_ == TaskKind::Regression ? 1 : 2; }
  nlohmann::json toJson() const override;
  static LinearModel fromJson(const nlohmann::json& j);

  double intercept() const { return intercept_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Set when least squares fell back to a ridge penalty.
  bool ridgeFallback = false;

 protected:
  Matrix predictUnchecked(const Matrix& x) const override;

 private:
  TaskKind kind_;
  double intercept_;
  std::vector<double> weights_;
};

struct LogisticParams {
  std::size_t epochs = 500;
  double learningRate = 0.5;
  double l2 = 0.0;
};

/// Ordinary least squares with intercept. A rank-deficient design falls back
/// to ridge with penalty 1e-8 on the weights and sets ridgeFallback.
LinearModel fitLeastSquares(const Matrix& x, const std::vector<double>& y);
/// Binary logistic regression by full-batch gradient descent from zero.
LinearModel fitLogistic(const Matrix& x, const std::vector<double>& y, const LogisticParams& params = {});

}  // namespace buyback::learn
