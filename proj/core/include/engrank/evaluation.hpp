#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "engrank/dataset.hpp"
#include "engrank/feature_table.hpp"
#include "engrank/metrics.hpp"
#include "engrank/models.hpp"
#include "engrank/stats.hpp"

namespace engrank {

// A model name plus fixed hyperparameters: what CV, elimination and search
// repeatedly train.
struct Trainer {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  TrainOptions options;
};

struct CvResult {
  std::vector<double> fold_scores;  // mean NDCG of each fold's held-out users
  double mean = 0.0;
  RankingSet out_of_fold;  // every user ranked by the model that did not see them
};

// User-grouped k-fold CV on `table` under `mask`.
CvResult cross_validate(const Trainer& trainer, const FeatureTable& table,
                        const FeatureMask& mask, const FoldPlan& plan,
                        const NdcgOptions& metric = {});

struct EliminationConfig {
  int folds = 5;
  Seed seed = 0;
  int max_removals = -1;  // negative: no limit
  NdcgOptions metric;
  FeatureMask start = FeatureMask::all();
  int threads = 1;  // 0: hardware concurrency; results do not depend on it
};

struct EliminationStep {
  std::size_t removed = 0;  // canonical feature index
  double score = 0.0;       // CV score after the removal
};

struct EliminationResult {
  FeatureMask mask;
  double baseline_score = 0.0;
  double final_score = 0.0;
  std::vector<EliminationStep> steps;
};

// Greedy backward elimination on CV mean NDCG. Each round tries removing
// every remaining feature and keeps the best removal if it strictly
// improves the current score; ties go to the lower feature index.
EliminationResult backward_elimination_trace(const Trainer& trainer, const FeatureTable& table,
                                             const EliminationConfig& cfg);
FeatureMask backward_elimination(const Trainer& trainer, const FeatureTable& table,
                                 const EliminationConfig& cfg);
// Featurizes `d` with statistics fitted on `d` itself, then eliminates.
FeatureMask backward_elimination(const Trainer& trainer, const Dataset& d,
                                 const EliminationConfig& cfg,
                                 const FeatureOptions& features = {});

struct ParamRange {
  enum class Kind { kLogUniform, kUniform, kInt, kCategorical };
  std::string name;
  Kind kind = Kind::kUniform;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<nlohmann::json> choices;
};

struct SearchSpace {
  std::vector<ParamRange> params;

  // Throws Error{InvalidConfig} on empty or inverted ranges.
  void validate() const;
  bool is_grid() const;  // every range categorical
  std::size_t grid_size() const;
  // Grid point `index` in mixed-radix order, first parameter slowest.
  nlohmann::json grid_point(std::size_t index) const;
  nlohmann::json sample(Rng& rng) const;

  // {"lr": {"log_uniform": [1e-3, 1]}, "epochs": {"int": [50, 300]},
  //  "c": {"uniform": [1, 10]}, "hidden": {"choice": [5, 10]}}
  static SearchSpace from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// A small space per model over its main knobs.
SearchSpace default_search_space(const std::string& model);

struct SearchConfig {
  int samples = 20;
  int folds = 5;
  Seed seed = 0;
  NdcgOptions metric;
  FeatureMask mask = FeatureMask::all();
  int threads = 1;
};

struct SearchResult {
  nlohmann::json best_params;
  double cv_score = 0.0;
  std::size_t best_index = 0;
  std::vector<nlohmann::json> candidates;
  std::vector<double> candidate_scores;
};

// Candidates overlay trainer.params. A grid space with samples >= its size
// is enumerated; a smaller budget draws grid points without replacement.
// Otherwise candidates are drawn independently. First maximiser wins.
SearchResult randomized_search(const Trainer& trainer, const SearchSpace& space,
                               const FeatureTable& table, const SearchConfig& cfg);

struct Significance {
  std::string a;
  std::string b;
  std::optional<TTestResult> test;  // empty when the differences are degenerate
  bool significant = false;         // p < alpha
  double alpha = 0.01;
};

// Paired t-test of per-fold scores a vs b.
Significance compare_fold_scores(const std::string& a_name, std::span<const double> a,
                                 const std::string& b_name, std::span<const double> b,
                                 double alpha = 0.01);
nlohmann::json significance_to_json(const Significance& s);

// Mean NDCG over the users of each fold.
std::vector<double> fold_means(const MetricReport& report, const FoldPlan& plan);

}  // namespace engrank
