#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "buyback/model.hpp"

namespace buyback::learn {

enum class LearnerKind {
  Baseline,
  Linear,
  DecisionTree,
  RandomForest,
  ExtraTrees,
  GbtLevelWise,
  GbtLeafWise,
  GbtSymmetric,
  NeuralNet,
};

inline constexpr std::array<LearnerKind, 9> kAllLearners{
    LearnerKind::Baseline,     LearnerKind::Linear,      LearnerKind::DecisionTree,
    LearnerKind::RandomForest, LearnerKind::ExtraTrees,  LearnerKind::GbtLevelWise,
    LearnerKind::GbtLeafWise,  LearnerKind::GbtSymmetric, LearnerKind::NeuralNet};

/// Numeric hyperparameters by name; integers and flags are stored as doubles.
using HyperParams = std::map<std::string, double>;

std::string_view learnerName(LearnerKind kind);
LearnerKind parseLearner(std::string_view name);
HyperParams defaultParams(LearnerKind kind, TaskKind task);

/// Fits `kind` with `params` layered over the defaults. Unknown parameter
/// names throw ConfigError.
ModelPtr fitLearner(LearnerKind kind, const Matrix& x, const std::vector<double>& y, TaskKind task,
                    const HyperParams& params, std::uint64_t seed, const FitControl& control = {});

inline constexpr int kModelFormatVersion = 1;

/// {"format": "buyback-model", "version": 1, "model": ...}
nlohmann::json modelToJson(const Model& model);
/// Throws DataError on an unknown type or a version mismatch.
ModelPtr modelFromJson(const nlohmann::json& j);
void saveModel(const std::filesystem::path& path, const Model& model);
ModelPtr loadModel(const std::filesystem::path& path);

}  // namespace buyback::learn
