#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "engrank/aggregation.hpp"
#include "engrank/dataset.hpp"
#include "engrank/evaluation.hpp"
#include "engrank/feature_table.hpp"

namespace engrank::cli {

struct ModelSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  // Randomized search before training when set.
  std::optional<SearchSpace> space;
  int search_samples = 0;
};

// End-to-end experiment description. Relative paths resolve against the
// directory holding the config file.
struct RunConfig {
  Seed seed = 0;
  std::filesystem::path output_dir;

  std::optional<SynthConfig> synthetic;
  std::filesystem::path interactions;
  std::filesystem::path profiles;

  FeatureOptions features;
  FeatureMask mask = FeatureMask::all();
  double test_fraction = 0.2;

  std::vector<ModelSpec> models;

  bool feature_selection = true;
  int selection_folds = 5;
  int max_removals = -1;
  int tuning_folds = 5;

  AggregateOptions aggregation;
  int weight_samples = 200;
  int weight_folds = 5;
  int oof_folds = 5;  // out-of-fold rankings feeding the weight search

  NdcgOptions metric;
  int eval_folds = 10;  // test-user folds for the t-tests
  int threads = 0;

  // Normalized echo of the config for reports and manifests (no output dir).
  nlohmann::json to_json() const;
};

// Validates the config; throws Error{InvalidConfig | Io}.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Runs every stage and writes report.json, report.txt, model and ranking
// artifacts under `out`. Returns the report.
nlohmann::json run_pipeline(const RunConfig& cfg, const std::filesystem::path& out);

// Fixed-width text rendering of a pipeline report.
std::string format_report(const nlohmann::json& report);

}  // namespace engrank::cli
