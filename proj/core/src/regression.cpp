#include "engrank/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "engrank/error.hpp"

namespace engrank {
namespace {

void check_training_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           Eigen::Index min_rows) {
  if (X.rows() < min_rows || X.rows() != y.size()) {
    throw Error(ErrorKind::kInvalidConfig, "training set has too few rows or misaligned labels",
                {{"rows", X.rows()}, {"labels", y.size()}, {"min_rows", min_rows}});
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw Error(ErrorKind::kInvalidConfig, "training inputs must be finite");
  }
}

Eigen::VectorXd to_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double dot(const Eigen::VectorXd& w, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += w[static_cast<Eigen::Index>(j)] * x[j];
  return s;
}

}  // namespace

double LinearModel::score_row(std::span<const double> x) const { return dot(weights_, x) + bias_; }

nlohmann::json LinearModel::to_json() const {
  return {{"weights", to_std(weights_)}, {"bias", bias_}};
}

LinearModel LinearModel::from_json(const nlohmann::json& j) {
  return LinearModel(to_vector(j.at("weights")), j.at("bias").get<double>());
}

double sgd_objective(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, double l2) {
  const Eigen::VectorXd r = (X * w).array() + b - y.array();
  return 0.5 * r.squaredNorm() / static_cast<double>(X.rows()) + l2 * w.squaredNorm();
}

Eigen::VectorXd sgd_gradient(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y, double l2) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd r = (X * w).array() + b - y.array();
  Eigen::VectorXd g(w.size() + 1);
  g.head(w.size()) = X.transpose() * r / n + 2.0 * l2 * w;
  g[w.size()] = r.sum() / n;
  return g;
}

LinearModel train_sgd_regressor(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const SgdRegressorConfig& cfg) {
  check_training_inputs(X, y, 1);
  if (cfg.epochs < 1 || !(cfg.lr > 0.0) || cfg.l2 < 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "sgd regressor needs epochs >= 1, lr > 0, l2 >= 0");
  }
  const Eigen::Index d = X.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  Rng rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(X.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  auto diverged = [&](int epoch) {
    throw Error(ErrorKind::kDiverged, "sgd regression diverged at epoch " + std::to_string(epoch),
                {{"epoch", epoch}, {"lr", cfg.lr}});
  };
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = cfg.lr / std::sqrt(static_cast<double>(epoch));
    rng.shuffle(order);
    for (Eigen::Index i : order) {
      const double residual = X.row(i).dot(w) + b - y[i];
      w -= lr * (residual * X.row(i).transpose() + 2.0 * cfg.l2 * w);
      b -= lr * residual;
    }
    if (!std::isfinite(b) || !w.allFinite() || !std::isfinite(sgd_objective(w, b, X, y, cfg.l2))) {
      diverged(epoch);
    }
  }
  return LinearModel(std::move(w), b);
}

double BayesianRidgeModel::score_row(std::span<const double> x) const {
  return dot(weights_, x) + bias_;
}

nlohmann::json BayesianRidgeModel::to_json() const {
  return {{"weights", to_std(weights_)}, {"bias", bias_},       {"alpha", alpha_},
          {"lambda", lambda_},           {"iterations_run", iterations_run_}};
}

BayesianRidgeModel BayesianRidgeModel::from_json(const nlohmann::json& j) {
  return BayesianRidgeModel(to_vector(j.at("weights")), j.at("bias").get<double>(),
                            j.at("alpha").get<double>(), j.at("lambda").get<double>(),
                            j.value("iterations_run", 0));
}

BayesianRidgeModel train_bayesian_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const BayesianRidgeConfig& cfg) {
  check_training_inputs(X, y, 1);
  if (cfg.max_iter < 0 || cfg.tol < 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "bayesian ridge needs max_iter >= 0 and tol >= 0");
  }
  constexpr double kMinPrecision = 1e-12;
  constexpr double kMaxPrecision = 1e12;
  const double n = static_cast<double>(X.rows());

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Xc.transpose() * Xc);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::kSingularSystem, "eigendecomposition of X'X failed");
  }
  const Eigen::VectorXd s = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::VectorXd proj = V.transpose() * (Xc.transpose() * yc);

  const double var_y = yc.squaredNorm() / n;
  double alpha = cfg.alpha_init.value_or(1.0 / (var_y + 1e-12));
  double lambda = cfg.lambda_init.value_or(1.0);

  auto posterior_mean = [&](double a, double l) {
    const double ridge = l / a;
    const double smax = s.size() ? s.maxCoeff() : 0.0;
    Eigen::VectorXd denom = s.array() + ridge;
    if (!denom.allFinite() || (denom.size() && denom.minCoeff() <= 1e-15 * std::max(smax, 1.0))) {
      throw Error(ErrorKind::kSingularSystem,
                  "regularized normal matrix is numerically singular",
                  {{"alpha", a}, {"lambda", l}});
    }
    return Eigen::VectorXd(V * (proj.array() / denom.array()).matrix());
  };

  Eigen::VectorXd w = posterior_mean(alpha, lambda);
  int iterations = 0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double gamma = (alpha * s.array() / (lambda + alpha * s.array())).sum();
    const double rss = (yc - Xc * w).squaredNorm();
    lambda = std::clamp(gamma / std::max(w.squaredNorm(), 1e-300), kMinPrecision, kMaxPrecision);
    alpha = std::clamp((n - gamma) / std::max(rss, 1e-300), kMinPrecision, kMaxPrecision);
    ++iterations;
    Eigen::VectorXd next = posterior_mean(alpha, lambda);
    const double change = w.size() ? (next - w).cwiseAbs().maxCoeff() : 0.0;
    w = std::move(next);
    if (change < cfg.tol) break;
  }
  const double bias = y_mean - x_mean.dot(w);
  return BayesianRidgeModel(std::move(w), bias, alpha, lambda, iterations);
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t node = 0;
  while (nodes[node].feature >= 0) {
    const auto& n = nodes[node];
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                          : n.right);
  }
  return nodes[node].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

RegressionTree build_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const ExtraTreesConfig& cfg, Seed seed) {
  Rng rng(seed);
  const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, cfg.min_samples_leaf));
  const Eigen::Index d = X.cols();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(X.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});

  RegressionTree tree;
  struct Pending {
    std::size_t node, begin, end;
  };
  tree.nodes.emplace_back();
  std::vector<Pending> stack = {{0, 0, idx.size()}};
  std::vector<Eigen::Index> live;
  std::vector<double> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));

  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const std::size_t count = p.end - p.begin;

    double sum = 0.0;
    double ymin = y[idx[p.begin]], ymax = ymin;
    for (std::size_t k = p.begin; k < p.end; ++k) {
      const double v = y[idx[k]];
      sum += v;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
    // A constant node stores the label itself so memorised leaves are exact.
    tree.nodes[p.node].value = ymin == ymax ? ymin : sum / static_cast<double>(count);
    if (ymin == ymax || count < 2 * min_leaf) continue;

    live.clear();
    for (Eigen::Index f = 0; f < d; ++f) {
      double a = X(idx[p.begin], f), b = a;
      for (std::size_t k = p.begin + 1; k < p.end; ++k) {
        const double v = X(idx[k], f);
        a = std::min(a, v);
        b = std::max(b, v);
      }
      if (a < b) {
        live.push_back(f);
        lo[static_cast<std::size_t>(f)] = a;
        hi[static_cast<std::size_t>(f)] = b;
      }
    }
    if (live.empty()) continue;

    const std::size_t k_draw =
        std::min(live.size(), static_cast<std::size_t>(std::max(1, cfg.k_features)));
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k_draw; ++c) {
      std::swap(live[c], live[c + rng.index(live.size() - c)]);
      const Eigen::Index f = live[c];
      const double a = lo[static_cast<std::size_t>(f)], b = hi[static_cast<std::size_t>(f)];
      double t = rng.uniform(a, b);
      if (!(t < b)) t = a;
      double left_sum = 0.0;
      std::size_t left_n = 0;
      for (std::size_t k = p.begin; k < p.end; ++k) {
        if (X(idx[k], f) <= t) {
          left_sum += y[idx[k]];
          ++left_n;
        }
      }
      const std::size_t right_n = count - left_n;
      if (left_n < min_leaf || right_n < min_leaf) continue;
      const double right_sum = sum - left_sum;
      // Maximising this is equivalent to maximising variance reduction.
      const double score = left_sum * left_sum / static_cast<double>(left_n) +
                           right_sum * right_sum / static_cast<double>(right_n);
      if (score > best_score) {
        best_score = score;
        best_feature = static_cast<int>(f);
        best_threshold = t;
      }
    }
    if (best_feature < 0) continue;

    auto mid = std::stable_partition(
        idx.begin() + static_cast<std::ptrdiff_t>(p.begin),
        idx.begin() + static_cast<std::ptrdiff_t>(p.end),
        [&](Eigen::Index r) { return X(r, best_feature) <= best_threshold; });
    const std::size_t split = static_cast<std::size_t>(mid - idx.begin());

    const std::size_t left = tree.nodes.size();
    tree.nodes.emplace_back();
    const std::size_t right = tree.nodes.size();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[p.node];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = static_cast<int>(left);
    node.right = static_cast<int>(right);
    stack.push_back({right, split, p.end});
    stack.push_back({left, p.begin, split});
  }
  return tree;
}

}  // namespace

double ExtraTreesModel::score_row(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return trees_.empty() ? 0.0 : sum / static_cast<double>(trees_.size());
}

nlohmann::json ExtraTreesModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value}});
  }
  return {{"num_features", num_features_},
          {"n_trees", cfg_.n_trees},
          {"k_features", cfg_.k_features},
          {"min_samples_leaf", cfg_.min_samples_leaf},
          {"seed", cfg_.seed},
          {"trees", trees}};
}

ExtraTreesModel ExtraTreesModel::from_json(const nlohmann::json& j) {
  ExtraTreesConfig cfg;
  cfg.n_trees = j.at("n_trees").get<int>();
  cfg.k_features = j.at("k_features").get<int>();
  cfg.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  cfg.seed = j.at("seed").get<Seed>();
  std::vector<RegressionTree> trees;
  for (const auto& t : j.at("trees")) {
    const auto feature = t.at("feature").get<std::vector<int>>();
    const auto threshold = t.at("threshold").get<std::vector<double>>();
    const auto left = t.at("left").get<std::vector<int>>();
    const auto right = t.at("right").get<std::vector<int>>();
    const auto value = t.at("value").get<std::vector<double>>();
    RegressionTree tree;
    for (std::size_t i = 0; i < feature.size(); ++i) {
      tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i]});
    }
    trees.push_back(std::move(tree));
  }
  return ExtraTreesModel(std::move(trees), j.at("num_features").get<std::size_t>(), cfg);
}

ExtraTreesModel train_extra_trees(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const ExtraTreesConfig& cfg) {
  check_training_inputs(X, y, 2);
  if (cfg.n_trees < 1 || cfg.k_features < 1 || cfg.min_samples_leaf < 1) {
    throw Error(ErrorKind::kInvalidConfig,
                "extra trees needs n_trees, k_features, min_samples_leaf >= 1");
  }
  std::vector<RegressionTree> trees(static_cast<std::size_t>(cfg.n_trees));
  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.n_trees));
  auto build_range = [&](unsigned w) {
    for (std::size_t t = w; t < trees.size(); t += workers) {
      trees[t] = build_tree(X, y, cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    }
  };
  if (workers <= 1) {
    build_range(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(build_range, w);
  }
  return ExtraTreesModel(std::move(trees), static_cast<std::size_t>(X.cols()), cfg);
}

}  // namespace engrank
