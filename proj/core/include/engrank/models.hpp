#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "engrank/feature_table.hpp"
#include "engrank/metrics.hpp"
#include "engrank/ranking.hpp"
#include "engrank/rng.hpp"
#include "engrank/scorer.hpp"

namespace engrank {

inline constexpr int kModelFormatVersion = 1;

enum class ModelFamily { kRegressor, kRanker };

// The nine base models in report order: regressors first.
const std::vector<std::string>& model_names();
// Throws Error{InvalidConfig} for unknown names.
ModelFamily model_family(const std::string& name);
bool is_known_model(const std::string& name);

// Regressors may be fitted on log1p(engagement); scores stay monotone so
// rankings are unaffected by the choice of inverse.
enum class LabelTransform { kNone, kLog1p };

struct TrainOptions {
  Seed seed = 0;
  NdcgOptions metric;  // adarank and lambdarank
  int threads = 1;     // xtrees
};

// A scorer together with everything needed to apply it to a feature table.
struct TrainedModel {
  std::string name;
  FeatureMask mask = FeatureMask::all();
  nlohmann::json params = nlohmann::json::object();
  std::shared_ptr<const Scorer> scorer;

  double score(std::span<const double> masked_row) const { return scorer->score(masked_row); }
  RankingSet rank(const FeatureTable& table) const;

  // {"format_version", "model", "mask", "params", "state"}.
  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
};

// Trains `name` on the masked columns of `table`. `params` holds that
// model's hyperparameters; unknown keys and out-of-range values throw
// Error{InvalidConfig}. Trainer errors propagate.
TrainedModel train_model(const std::string& name, const nlohmann::json& params,
                         const FeatureTable& table, const FeatureMask& mask,
                         const TrainOptions& options = {});

// Hyperparameter keys accepted by `name` with their defaults.
nlohmann::json default_params(const std::string& name);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace engrank
