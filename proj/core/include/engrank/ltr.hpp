#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "engrank/feature_table.hpp"
#include "engrank/metrics.hpp"
#include "engrank/ranking.hpp"
#include "engrank/rng.hpp"
#include "engrank/scorer.hpp"

namespace engrank {

// One user's tweets: the unit every ranker is trained and evaluated on.
struct QueryGroup {
  std::string user_id;
  Eigen::MatrixXd features;  // rows x masked features
  std::vector<double> labels;
  std::vector<std::string> tweet_ids;

  std::size_t size() const { return labels.size(); }
  // Number of (i, j) with labels[i] > labels[j].
  std::size_t discordant_pairs() const;
};

std::vector<QueryGroup> make_query_groups(const FeatureTable& table, const FeatureMask& mask);

// Score descending, ties by tweet_id ascending. Throws Error{SchemaMismatch}.
Ranking rank_group(const Scorer& model, const QueryGroup& g);
RankingSet rank_groups(const Scorer& model, const std::vector<QueryGroup>& groups);

// w.x. `kind` records which trainer produced it (listnet, ranksvm, listmle).
class LinearRanker final : public Scorer {
 public:
  LinearRanker() = default;
  LinearRanker(std::string kind, Eigen::VectorXd weights)
      : kind_(std::move(kind)), weights_(std::move(weights)) {}

  std::string_view kind() const override { return kind_; }
  std::size_t num_features() const override { return static_cast<std::size_t>(weights_.size()); }
  double score_row(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static LinearRanker from_json(std::string kind, const nlohmann::json& j);

  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  std::string kind_;
  Eigen::VectorXd weights_;
};

// s(x) = w2 . sigmoid(W1 x + b1) + b2.
class NeuralRanker final : public Scorer {
 public:
  NeuralRanker() = default;
  NeuralRanker(std::string kind, Eigen::MatrixXd w1, Eigen::VectorXd b1, Eigen::VectorXd w2,
               double b2)
      : kind_(std::move(kind)), w1_(std::move(w1)), b1_(std::move(b1)), w2_(std::move(w2)),
        b2_(b2) {}

  // W1 ~ U(-1/sqrt(d), 1/sqrt(d)); output layer zero unless `random_output`.
  static NeuralRanker initialize(std::string kind, std::size_t inputs, std::size_t hidden,
                                 Seed seed, bool random_output = false);

  std::string_view kind() const override { return kind_; }
  std::size_t num_features() const override { return static_cast<std::size_t>(w1_.cols()); }
  double score_row(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static NeuralRanker from_json(std::string kind, const nlohmann::json& j);

  std::size_t hidden() const { return static_cast<std::size_t>(w1_.rows()); }
  // Scores and hidden activations for every row of X.
  Eigen::VectorXd forward(const Eigen::MatrixXd& X, Eigen::MatrixXd* hidden = nullptr) const;

  // Flattened as W1 (row-major), b1, w2, b2.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& p);
  std::size_t parameter_count() const;

  // dLoss/dparams given dLoss/dscore for each row.
  Eigen::VectorXd backward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& hidden,
                           const Eigen::VectorXd& score_grad) const;

 private:
  std::string kind_;
  Eigen::MatrixXd w1_;
  Eigen::VectorXd b1_;
  Eigen::VectorXd w2_;
  double b2_ = 0.0;
};

// s(x) = sum_t alpha_t * direction_t * x[feature_t].
class BoostedRanker final : public Scorer {
 public:
  struct Round {
    std::size_t feature = 0;
    int direction = 1;
    double alpha = 0.0;
  };

  BoostedRanker() = default;
  BoostedRanker(std::vector<Round> rounds, std::size_t num_features)
      : rounds_(std::move(rounds)), num_features_(num_features) {}

  std::string_view kind() const override { return "adarank"; }
  std::size_t num_features() const override { return num_features_; }
  double score_row(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static BoostedRanker from_json(const nlohmann::json& j);

  const std::vector<Round>& rounds() const { return rounds_; }

 private:
  std::vector<Round> rounds_;
  std::size_t num_features_ = 0;
};

// ---- ListNet (top-1 Plackett-Luce cross entropy) ----

struct ListNetConfig {
  double lr = 0.1;
  int epochs = 200;
  Seed seed = 0;
  double temperature = 1.0;  // target = softmax(labels / temperature)
  double l2 = 0.0;
};

// -sum_j softmax(labels/T)_j * log softmax(scores)_j.
double listnet_group_loss(const Eigen::VectorXd& scores, std::span<const double> labels,
                          double temperature = 1.0);
// d loss / d scores = softmax(scores) - softmax(labels/T).
Eigen::VectorXd listnet_score_gradient(const Eigen::VectorXd& scores,
                                       std::span<const double> labels, double temperature = 1.0);
// Mean over groups with >= 2 rows and >= 2 distinct labels.
double listnet_loss(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                    const ListNetConfig& cfg);
Eigen::VectorXd listnet_gradient(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                                 const ListNetConfig& cfg);
// Throws Error{Diverged}.
LinearRanker train_listnet(const std::vector<QueryGroup>& groups, const ListNetConfig& cfg = {});

// ---- RankingSVM (primal pairwise hinge) ----

struct RankSvmConfig {
  double c = 100.0;
  int epochs = 200;
  double lr = 0.01;
  Seed seed = 0;
};

// |w|^2 / (2C) + mean over groups with pairs of the group's mean hinge
// max(0, 1 - w.(x_i - x_j)) over pairs with label_i > label_j.
double ranksvm_objective(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                         const RankSvmConfig& cfg);
Eigen::VectorXd ranksvm_gradient(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                                 const RankSvmConfig& cfg);
LinearRanker train_ranking_svm(const std::vector<QueryGroup>& groups,
                               const RankSvmConfig& cfg = {});

// ---- ListMLE (Plackett-Luce likelihood of the label order) ----

struct ListMleConfig {
  double lr = 0.05;
  int epochs = 200;
  Seed seed = 0;
  double l2 = 0.0;
};

// Target permutation: labels descending, ties by tweet_id ascending.
std::vector<std::size_t> listmle_permutation(std::span<const double> labels,
                                             std::span<const std::string> ids);
// -log P(permutation | scores).
double listmle_group_loss(const Eigen::VectorXd& scores, std::span<const double> labels,
                          std::span<const std::string> ids);
Eigen::VectorXd listmle_score_gradient(const Eigen::VectorXd& scores,
                                       std::span<const double> labels,
                                       std::span<const std::string> ids);
double listmle_loss(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                    const ListMleConfig& cfg);
Eigen::VectorXd listmle_gradient(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                                 const ListMleConfig& cfg);
LinearRanker train_listmle(const std::vector<QueryGroup>& groups, const ListMleConfig& cfg = {});

// ---- AdaRank ----

struct AdaRankConfig {
  int rounds = 50;
  NdcgOptions metric;
};

// Throws Error{NoUsefulWeakRanker} when no single-feature ranker beats the
// tie-order baseline on the first round.
BoostedRanker train_adarank(const std::vector<QueryGroup>& groups, const AdaRankConfig& cfg = {});

// ---- RankNet / LambdaRank ----

struct NeuralRankConfig {
  int hidden = 10;
  double lr = 0.05;
  int epochs = 500;
  Seed seed = 0;
  bool random_output_init = false;
  NdcgOptions metric;  // LambdaRank only
};

// Mean over discordant pairs of log(1 + exp(-(s_i - s_j))); 0 without pairs.
double ranknet_group_loss(const NeuralRanker& net, const QueryGroup& g);
Eigen::VectorXd ranknet_group_gradient(const NeuralRanker& net, const QueryGroup& g);
NeuralRanker train_ranknet(const std::vector<QueryGroup>& groups,
                           const NeuralRankConfig& cfg = {});

struct PairLambda {
  std::size_t better = 0;  // row with the higher label
  std::size_t worse = 0;
  double delta_ndcg = 0.0;  // |change in NDCG@k| from swapping the two
  double lambda = 0.0;      // delta_ndcg * sigmoid(-(s_better - s_worse))
};

// Pairs ordered by (better, worse) row index; positions come from the
// current score ranking (ties by tweet_id).
std::vector<PairLambda> lambdarank_pairs(const Eigen::VectorXd& scores,
                                         std::span<const double> labels,
                                         std::span<const std::string> ids,
                                         const NdcgOptions& metric = {});
// d pseudo-loss / d score per row (negative pushes a row up).
Eigen::VectorXd lambdarank_score_gradient(const Eigen::VectorXd& scores,
                                          std::span<const double> labels,
                                          std::span<const std::string> ids,
                                          const NdcgOptions& metric = {});
NeuralRanker train_lambdarank(const std::vector<QueryGroup>& groups,
                              const NeuralRankConfig& cfg = {});

}  // namespace engrank
