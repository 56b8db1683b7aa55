#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "engrank/metrics.hpp"
#include "engrank/ranking.hpp"
#include "engrank/rng.hpp"

namespace engrank {

// Number of unordered pairs ordered differently by a and b.
// Throws Error{IdSetMismatch} unless both rank the same distinct ids.
std::size_t kendall_tau(const Ranking& a, const Ranking& b);

// kMinimizeDisagreement is the standard Kemeny objective
//   argmin_r sum_i w_i * K(r, r_i).
// kMaximizeAgreement evaluates the sign-flipped objective argmax_r of the
// same sum, kept for auditing the alternative reading of the formula.
enum class AggregationObjective { kMinimizeDisagreement, kMaximizeAgreement };

std::string objective_name(AggregationObjective o);
AggregationObjective parse_objective(const std::string& name);

struct AggregateOptions {
  AggregationObjective objective = AggregationObjective::kMinimizeDisagreement;
  // Lists of at most this many items are solved exactly.
  std::size_t exact_threshold = 8;
  // Skip the exact solver regardless of list length.
  bool force_heuristic = false;
};

// n base rankers' per-user outputs and their nonnegative weights.
struct WeightedRankerSet {
  std::vector<std::string> names;
  std::vector<RankingSet> outputs;
  std::vector<double> weights;

  // Throws Error{EmptyRankerSet | InvalidConfig}.
  void validate() const;
  // Users present in every ranker's output. Throws Error{IdSetMismatch}
  // when rankers cover different users.
  std::vector<std::string> users() const;
};

struct Consensus {
  Ranking ranking;
  double cost = 0.0;  // sum_i w_i * K(ranking, r_i)
  bool exact = false;
};

// Pairwise weighted preference data for one user's list. Item indices
// follow ascending tweet_id; prefer(a, b) = sum of weights of rankers
// placing a above b.
struct PreferenceMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd prefer;
};

PreferenceMatrix build_preferences(std::span<const Ranking* const> rankings,
                                   std::span<const double> weights);

// Exact minimiser (lexicographically smallest optimum) by dynamic
// programming over item subsets; equivalent to exhaustive permutation
// search. Intended for up to ~16 items.
Consensus kemeny_exact(const PreferenceMatrix& p, AggregationObjective objective);
// Weighted Borda start, then adjacent-transposition and single-item
// insertion moves until no move improves.
Consensus kemeny_local_search(const PreferenceMatrix& p, AggregationObjective objective);

// Throws Error{EmptyRankerSet | IdSetMismatch}.
Consensus aggregate(const WeightedRankerSet& set, const std::string& user_id,
                    const AggregateOptions& options = {});
RankingSet aggregate_all(const WeightedRankerSet& set, const AggregateOptions& options = {});

// Weighted Borda count: score = sum_i w_i * (m - position_i), position
// 0-based; ties by tweet_id.
Ranking borda(const WeightedRankerSet& set, const std::string& user_id);
RankingSet borda_all(const WeightedRankerSet& set);

// sum_i w_i * K(r, r_i) computed pair by pair.
double weighted_kendall_cost(const Ranking& r, std::span<const Ranking* const> inputs,
                             std::span<const double> weights);

struct WeightSearchConfig {
  int samples = 200;
  int folds = 5;
  Seed seed = 0;
  // Put the uniform vector at candidate index 0, ahead of the random draws.
  bool include_uniform = true;
  NdcgOptions metric;
  AggregateOptions aggregation;
  // 0 picks hardware concurrency; the result does not depend on it.
  int threads = 0;
};

struct WeightSearchResult {
  std::vector<double> weights;
  double cv_score = 0.0;
  std::vector<double> fold_scores;
  std::size_t best_index = 0;
  std::vector<std::vector<double>> candidates;
  std::vector<double> candidate_scores;
};

// Randomized search over the weight simplex. Each candidate is scored by
// the mean over user folds of the fold-mean NDCG of its aggregated
// rankings; the first maximiser wins. Throws Error{DegenerateLabels |
// InvalidConfig | TooFewUsers | IdSetMismatch}.
WeightSearchResult learn_weights(const std::vector<RankingSet>& outputs,
                                 const std::map<std::string, double>& labels,
                                 const WeightSearchConfig& cfg);

// Dirichlet(1, ..., 1) draw.
std::vector<double> sample_simplex(Rng& rng, std::size_t n);

}  // namespace engrank
