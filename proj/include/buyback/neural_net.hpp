#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "buyback/model.hpp"

namespace buyback::learn {

struct NetParams {
  std::vector<std::size_t> hiddenSizes{32, 16};
  std::size_t epochs = 60;
  double learningRate = 0.01;
  double momentum = 0.9;
  std::size_t batchSize = 32;
  std::uint64_t seed = 0;
};

/// Fully connected net with ReLU hidden layers. Regression has one identity
/// output; binary classification has one sigmoid output reported as
/// [1 - p, p]. Parameters live in one flat vector: per layer, the weight
/// matrix (row = output neuron) followed by the biases.
class NeuralNet final : public Model {
 public:
  NeuralNet(TaskKind kind, std::vector<std::size_t> layerSizes, std::vector<double> parameters);

  std::string typeName() const override { return "neuralNet"; }
  TaskKind kind() const override { return kind_; }
  std::size_t inputCount() const override { return layers_.front(); }
  std::size_t outputCount() const override { return kind_ == TaskKind::Regression ? 1 : 2; }
  nlohmann::json toJson() const override;
  static NeuralNet fromJson(const nlohmann::json& j);

  const std::vector<std::size_t>& layerSizes() const { return layers_; }
  const std::vector<double>& parameters() const { return params_; }

  /// Mean loss (squared error, or log loss) over rows and its gradient with
  /// respect to `parameters`.
  static double lossAndGradient(TaskKind kind, const std::vector<std::size_t>& layers,
                                const std::vector<double>& parameters, const Matrix& x, const std::vector<double>& y,
                                std::span<const std::size_t> rows, std::vector<double>* gradient);

  static std::size_t parameterCount(const std::vector<std::size_t>& layers);

 protected:
  Matrix predictUnchecked(const Matrix& x) const override;

 private:
  TaskKind kind_;
  std::vector<std::size_t> layers_;
  std::vector<double> params_;
};

/// Weights uniform in +-sqrt(6 / fanIn), biases zero, all from `seed`.
std::vector<double> initialParameters(const std::vector<std::size_t>& layers, std::uint64_t seed);

/// Mini-batch SGD with momentum over seeded shuffles. Throws DomainError when
/// the loss becomes non-finite.
NeuralNet fitNeuralNet(const Matrix& x, const std::vector<double>& y, TaskKind kind, const NetParams& params,
                       const FitControl& control = {});

}  // namespace buyback::learn
