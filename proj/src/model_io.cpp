#include <fstream>

#include "buyback/boosting.hpp"
#include "buyback/ensembling.hpp"
#include "buyback/feature_engineering.hpp"
#include "buyback/forest.hpp"
#include "buyback/io.hpp"
#include "buyback/learners.hpp"
#include "buyback/linear.hpp"
#include "buyback/neural_net.hpp"
#include "buyback/tree.hpp"

namespace buyback::learn {

nlohmann::json modelToJson(const Model& model) {
  return {{"format", "buyback-model"}, {"version", kModelFormatVersion}, {"model", model.toJson()}};
}

ModelPtr modelFromJson(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "buyback-model") throw DataError("not a model document");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("model format version " + std::to_string(version) + " is not supported");
    }
    const nlohmann::json& m = j.at("model");
    const std::string type = m.at("type").get<std::string>();
    if (type == "baseline") return std::make_shared<BaselineModel>(BaselineModel::fromJson(m));
    if (type == "linear") return std::make_shared<LinearModel>(LinearModel::fromJson(m));
    if (type == "tree") return std::make_shared<DecisionTree>(DecisionTree::fromJson(m));
    if (type == "randomForest" || type == "extraTrees") return std::make_shared<Forest>(Forest::fromJson(m));
    if (type.starts_with("gbt")) return std::make_shared<BoostedModel>(BoostedModel::fromJson(m));
    if (type == "neuralNet") return std::make_shared<NeuralNet>(NeuralNet::fromJson(m));
    if (type == "ensemble") return std::make_shared<ensemble::EnsembleModel>(ensemble::EnsembleModel::fromJson(m));
    if (type == "stacked") return std::make_shared<ensemble::StackedModel>(ensemble::StackedModel::fromJson(m));
    if (type == "featurePipeline") {
      return std::make_shared<automl::FeaturePipelineModel>(automl::FeaturePipelineModel::fromJson(m));
    }
    throw DataError("unknown model type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

void saveModel(const std::filesystem::path& path, const Model& model) {
  io::writeText(path, modelToJson(model).dump() + "\n");
}

ModelPtr loadModel(const std::filesystem::path& path) {
  try {
    return modelFromJson(nlohmann::json::parse(io::readText(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace buyback::learn
