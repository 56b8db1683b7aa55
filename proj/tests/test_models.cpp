#include <gtest/gtest.h>

#include "engrank/error.hpp"
#include "engrank/models.hpp"
#include "support.hpp"

using namespace engrank;

namespace {

FeatureTable small_table() {
  Rng rng(1);
  return test::make_table(12, 6, [&](std::size_t, Eigen::Ref<Eigen::RowVectorXd> f) {
    for (Eigen::Index j = 0; j < f.size(); ++j) f[j] = rng.normal();
    return std::clamp(std::round(2.0 + f[0] - f[3]), 0.0, 4.0);
  });
}

nlohmann::json quick_params(const std::string& name) {
  if (name == "xtrees") return {{"n_trees", 5}};
  if (name == "bayridge") return nlohmann::json::object();
  if (name == "adarank") return {{"rounds", 5}};
  return {{"epochs", 10}};
}

}  // namespace

TEST(Registry, NamesAndFamilies) {
  EXPECT_EQ(model_names().size(), 9u);
  EXPECT_EQ(model_family("sgdr"), ModelFamily::kRegressor);
  EXPECT_EQ(model_family("xtrees"), ModelFamily::kRegressor);
  EXPECT_EQ(model_family("lambdarank"), ModelFamily::kRanker);
  EXPECT_FALSE(is_known_model("gbdt"));
  EXPECT_THROW(model_family("gbdt"), Error);
}

TEST(Models, EveryModelRoundTripsThroughJson) {
  const auto table = small_table();
  const std::size_t idx[] = {0, 3, 5, 8};
  const auto mask = FeatureMask::from_indices(idx);
  test::TempDir dir("models");
  for (const auto& name : model_names()) {
    SCOPED_TRACE(name);
    const auto m = train_model(name, quick_params(name), table, mask, {.seed = 2});
    EXPECT_EQ(m.name, name);
    EXPECT_EQ(m.scorer->num_features(), 4u);
    const auto path = dir / (name + ".json");
    save_model(path, m);
    const auto back = load_model(path);
    EXPECT_EQ(back.mask, mask);
    EXPECT_EQ(back.to_json(), m.to_json());
    const auto a = m.rank(table), b = back.rank(table);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 12u);
  }
}

TEST(Models, TrainingIsDeterministic) {
  const auto table = small_table();
  for (const auto& name : model_names()) {
    SCOPED_TRACE(name);
    const auto a = train_model(name, quick_params(name), table, FeatureMask::all(), {.seed = 3});
    const auto b = train_model(name, quick_params(name), table, FeatureMask::all(), {.seed = 3});
    EXPECT_EQ(a.to_json(), b.to_json());
  }
}

TEST(Models, ParamsMergeDefaults) {
  const auto m = train_model("sgdr", {{"epochs", 7}}, small_table(), FeatureMask::all());
  const auto defaults = default_params("sgdr");
  EXPECT_EQ(m.params.at("epochs"), 7);
  EXPECT_EQ(m.params.at("lr"), defaults.at("lr"));
}

TEST(Models, XtreesClampsFeatureCount) {
  const std::size_t idx[] = {0, 3};
  const auto m = train_model("xtrees", {{"n_trees", 2}, {"k_features", 6}}, small_table(), FeatureMask::from_indices(idx));
  EXPECT_EQ(m.params.at("k_features"), 2);
}

TEST(Models, RejectsBadParams) {
  const auto table = small_table();
  for (const auto& bad : {nlohmann::json{{"bogus", 1}}, nlohmann::json{{"epochs", "many"}},
                          nlohmann::json{{"epochs", 0}}}) {
    try {
      train_model("listnet", bad, table, FeatureMask::all());
      FAIL() << bad.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kInvalidConfig);
    }
  }
  EXPECT_THROW(train_model("sgdr", {{"label_transform", "sqrt"}}, table, FeatureMask::all()), Error);
  EXPECT_THROW(train_model("nope", {}, table, FeatureMask::all()), Error);
}

TEST(Models, LogTransformKeepsRankingMonotone) {
  const auto table = small_table();
  const auto m = train_model("bayridge", {{"label_transform", "log1p"}}, table, FeatureMask::all());
  EXPECT_EQ(m.rank(table).size(), 12u);
}

TEST(Models, LoadRejectsVersionAndWidthMismatch) {
  const auto m = train_model("sgdr", quick_params("sgdr"), small_table(), FeatureMask::all());
  auto j = m.to_json();
  j["format_version"] = 99;
  try {
    TrainedModel::from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchemaMismatch);
  }
  j = m.to_json();
  const std::size_t one[] = {4};
  j["mask"] = mask_to_json(FeatureMask::from_indices(one));
  EXPECT_THROW(TrainedModel::from_json(j), Error);
}
