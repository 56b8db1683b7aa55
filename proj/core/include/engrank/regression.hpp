#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "engrank/rng.hpp"
#include "engrank/scorer.hpp"

namespace engrank {

// w.x + b.
class LinearModel final : public Scorer {
 public:
  LinearModel() = default;
  LinearModel(Eigen::VectorXd weights, double bias)
      : weights_(std::move(weights)), bias_(bias) {}

  std::string_view kind() const override { return "sgdr"; }
  std::size_t num_features() const override { return static_cast<std::size_t>(weights_.size()); }
  double score_row(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static LinearModel from_json(const nlohmann::json& j);

  const Eigen::VectorXd& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
};

struct SgdRegressorConfig {
  double lr = 0.01;  // decayed as lr / sqrt(epoch)
  double l2 = 1e-4;
  int epochs = 100;
  Seed seed = 0;
};

// Objective: mean_i 0.5 * (w.x_i + b - y_i)^2 + l2 * |w|^2.
double sgd_objective(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, double l2);
// Full-batch gradient of sgd_objective; `grad` has size d + 1 (bias last).
Eigen::VectorXd sgd_gradient(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y, double l2);

// Throws Error{Diverged | InvalidConfig}.
LinearModel train_sgd_regressor(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const SgdRegressorConfig& cfg);

class BayesianRidgeModel final : public Scorer {
 public:
  BayesianRidgeModel() = default;
  BayesianRidgeModel(Eigen::VectorXd weights, double bias, double alpha, double lambda,
                     int iterations_run)
      : weights_(std::move(weights)),
        bias_(bias),
        alpha_(alpha),
        lambda_(lambda),
        iterations_run_(iterations_run) {}

  std::string_view kind() const override { return "bayridge"; }
  std::size_t num_features() const override { return static_cast<std::size_t>(weights_.size()); }
  double score_row(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static BayesianRidgeModel from_json(const nlohmann::json& j);

  const Eigen::VectorXd& weights() const { return weights_; }
  double bias() const { return bias_; }
  // Noise precision.
  double alpha() const { return alpha_; }
  // Weight precision.
  double lambda() const { return lambda_; }
  int iterations_run() const { return iterations_run_; }

 private:
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
  double alpha_ = 1.0;
  double lambda_ = 1.0;
  int iterations_run_ = 0;
};

struct BayesianRidgeConfig {
  int max_iter = 300;
  double tol = 1e-3;
  // Starting precisions; default alpha = 1/var(y), lambda = 1.
  std::optional<double> alpha_init;
  std::optional<double> lambda_init;
};

// Evidence maximisation: alternates the posterior mean
//   w = alpha (lambda I + alpha X'X)^-1 X'y      (X, y centered)
// with gamma = sum_i alpha s_i / (lambda + alpha s_i), lambda = gamma / |w|^2,
// alpha = (n - gamma) / |y - Xw|^2. max_iter = 0 returns the posterior mean
// under the initial precisions. Throws Error{SingularSystem}.
BayesianRidgeModel train_bayesian_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const BayesianRidgeConfig& cfg = {});

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf mean label
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t leaf_count() const;
};

struct ExtraTreesConfig {
  int n_trees = 100;
  int k_features = 6;
  int min_samples_leaf = 2;
  Seed seed = 0;
  // 0 picks hardware concurrency. Results do not depend on it.
  int threads = 1;
};

class ExtraTreesModel final : public Scorer {
 public:
  ExtraTreesModel() = default;
  ExtraTreesModel(std::vector<RegressionTree> trees, std::size_t num_features,
                  ExtraTreesConfig cfg)
      : trees_(std::move(trees)), num_features_(num_features), cfg_(cfg) {}

  std::string_view kind() const override { return "xtrees"; }
  std::size_t num_features() const override { return num_features_; }
  // Arithmetic mean of the trees' predictions.
  double score_row(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static ExtraTreesModel from_json(const nlohmann::json& j);

  const std::vector<RegressionTree>& trees() const { return trees_; }
  const ExtraTreesConfig& config() const { return cfg_; }

 private:
  std::vector<RegressionTree> trees_;
  std::size_t num_features_ = 0;
  ExtraTreesConfig cfg_;
};

// Each split keeps the best of k random (feature, uniform threshold)
// candidates by variance reduction. No bootstrap. Deterministic per seed;
// tree t draws from substream derive_seed(seed, t).
ExtraTreesModel train_extra_trees(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const ExtraTreesConfig& cfg = {});

}  // namespace engrank
