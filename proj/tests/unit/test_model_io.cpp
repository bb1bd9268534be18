#include <memory>
#include <vector>

#include "buyback/ensembling.hpp"
#include "buyback/feature_engineering.hpp"
#include "buyback/learners.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace buyback;
using namespace buyback::learn;

namespace {

struct Data {
  Matrix x;
  std::vector<double> y;
};

Data data(TaskKind kind) {
  Rng rng(17);
  Data d{Matrix(60, 3), {}};
  for (std::size_t r = 0; r < 60; ++r) {
    for (std::size_t c = 0; c < 3; ++c) d.x(r, c) = rng.normal();
    const double s = d.x(r, 0) - d.x(r, 1) + rng.normal(0.0, 0.3);
    d.y.push_back(kind == TaskKind::Regression ? s : (s > 0.0 ? 1.0 : 0.0));
  }
  return d;
}

void checkRoundTrip(const Model& model, const Matrix& x) {
  const ModelPtr back = modelFromJson(modelToJson(model));
  CHECK(back->typeName() == model.typeName());
  CHECK(back->predict(x) == model.predict(x));
  CHECK(modelToJson(*back) == modelToJson(model));
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("every learner round trips bit-exactly") {
    for (TaskKind kind : {TaskKind::Classification, TaskKind::Regression}) {
      const Data d = data(kind);
      for (LearnerKind learner : kAllLearners) {
        CAPTURE(learnerName(learner));
        const ModelPtr model = fitLearner(learner, d.x, d.y, kind, {}, 3);
        checkRoundTrip(*model, d.x);
      }
    }
  }

  TEST_CASE("ensembles, stacks and feature pipelines round trip") {
    const Data d = data(TaskKind::Classification);
    const ModelPtr tree = fitLearner(LearnerKind::DecisionTree, d.x, d.y, TaskKind::Classification, {}, 1);
    const ModelPtr linear = fitLearner(LearnerKind::Linear, d.x, d.y, TaskKind::Classification, {}, 1);
    const ensemble::EnsembleModel ens(TaskKind::Classification, {{"tree", tree, 2, false}, {"linear", linear, 1, false}});
    checkRoundTrip(ens, d.x);

    auto factory = [](LearnerKind kind) {
      return [kind](const Matrix& x, const std::vector<double>& y, std::uint64_t seed) {
        return fitLearner(kind, x, y, TaskKind::Classification, {}, seed);
      };
    };
    const ensemble::StackFit stack = ensemble::fitStacked(d.x, d.y, TaskKind::Classification,
                                                          factory(LearnerKind::DecisionTree),
                                                          factory(LearnerKind::Linear), 3, 5);
    checkRoundTrip(*stack.model, d.x);

    const std::vector<automl::GoldenRecipe> recipes{{0, 1, automl::GoldenOp::Difference, 0.0}};
    const Matrix augmented = automl::applyGoldenRecipes(d.x, recipes);
    const std::vector<std::size_t> columns{0, 3};
    const ModelPtr inner =
        fitLearner(LearnerKind::Linear, augmented.selectColumns(columns), d.y, TaskKind::Classification, {}, 1);
    const automl::FeaturePipelineModel pipeline(recipes, columns, 3, inner);
    checkRoundTrip(pipeline, d.x);
  }

  TEST_CASE("files round trip and bad documents are rejected") {
    const Data d = data(TaskKind::Regression);
    const ModelPtr model = fitLearner(LearnerKind::GbtLeafWise, d.x, d.y, TaskKind::Regression, {}, 2);
    testing::TempDir dir("model-io");
    saveModel(dir / "model.json", *model);
    CHECK(loadModel(dir / "model.json")->predict(d.x) == model->predict(d.x));

    nlohmann::json doc = modelToJson(*model);
    doc["version"] = kModelFormatVersion + 1;
    CHECK_THROWS_AS(modelFromJson(doc), DataError);
    doc = modelToJson(*model);
    doc["model"]["type"] = "mystery";
    CHECK_THROWS_AS(modelFromJson(doc), DataError);
    CHECK_THROWS_AS(modelFromJson(nlohmann::json{{"format", "buyback-model"}}), DataError);
  }

  TEST_CASE("predicting with the wrong column count is a data error") {
    const Data d = data(TaskKind::Regression);
    const ModelPtr model = fitLearner(LearnerKind::Linear, d.x, d.y, TaskKind::Regression, {}, 2);
    CHECK_THROWS_AS(model->predict(Matrix(2, 5)), DataError);
  }

  TEST_CASE("unknown hyperparameters are configuration errors") {
    const Data d = data(TaskKind::Regression);
    CHECK_THROWS_AS(fitLearner(LearnerKind::DecisionTree, d.x, d.y, TaskKind::Regression, {{"bogus", 1.0}}, 2),
                    ConfigError);
    for (LearnerKind learner : kAllLearners) CHECK(parseLearner(learnerName(learner)) == learner);
  }
}
