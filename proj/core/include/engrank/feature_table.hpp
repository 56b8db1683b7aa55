#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "engrank/dataset.hpp"
#include "engrank/features.hpp"

namespace engrank {

// Row-aligned feature matrix with ids and engagement labels. `features`
// always holds all kNumFeatures columns; masks are applied by consumers.
struct FeatureTable {
  std::vector<std::string> tweet_ids;
  std::vector<std::string> user_ids;
  std::vector<double> labels;
  Eigen::MatrixXd features;

  std::size_t rows() const { return tweet_ids.size(); }
  std::vector<std::string> users() const;
  // Row indices per user, in table order.
  std::map<std::string, std::vector<std::size_t>> user_rows() const;
  FeatureTable select_rows(const std::vector<std::size_t>& rows) const;
  FeatureTable select_users(const std::set<std::string>& users) const;
  // Columns picked by the mask, in slot order.
  Eigen::MatrixXd masked(const FeatureMask& mask) const;
  std::map<std::string, double> label_map() const;
  FeatureVector row_vector(std::size_t row) const;
};

struct FeatureOptions {
  HolidayCalendar holidays;
  std::optional<Timestamp> reference_time;
};

// Everything a held-out slice needs to be featurized consistently with the
// slice the statistics were fitted on.
struct FeatureContext {
  MovieStatsTable movie_stats;
  Normalizer normalizer;
  FeatureOptions options;
  FeatureMask mask = FeatureMask::all();
};

// Raw (unnormalized) features of every interaction in `d`, ordered as in
// d.interactions. User aggregates come from `d` itself.
FeatureTable raw_feature_table(const Dataset& d, const MovieStatsTable& movie_stats,
                               const FeatureOptions& options);

FeatureTable normalize_table(const FeatureTable& raw, const Normalizer& n);
Normalizer fit_normalizer(const FeatureTable& raw);

// Fits movie statistics and the normalizer on `train`.
FeatureContext fit_feature_context(const Dataset& train, const FeatureOptions& options);

// Normalized table for `d` under a fitted context.
FeatureTable featurize(const Dataset& d, const FeatureContext& context);

// CSV `tweet_id,user_id,engagement,f00..f26`, values printed round-trip exact.
void write_feature_csv(std::ostream& out, const FeatureTable& table);
FeatureTable read_feature_csv(std::istream& in, const std::string& source = "<stream>");
FeatureTable read_feature_csv(const std::filesystem::path& path);

// Sidecar: feature names, normalizer, mask, schema_version plus the
// movie statistics and options needed to featurize further slices.
nlohmann::json feature_context_to_json(const FeatureContext& context);
FeatureContext feature_context_from_json(const nlohmann::json& j);

nlohmann::json mask_to_json(const FeatureMask& mask);
FeatureMask mask_from_json(const nlohmann::json& j);

}  // namespace engrank
