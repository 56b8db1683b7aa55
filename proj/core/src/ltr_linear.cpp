#include <algorithm>
#include <cmath>
#include <numeric>

#include "engrank/error.hpp"
#include "engrank/ltr.hpp"

namespace engrank {
namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_json_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  const double m = x.maxCoeff();
  Eigen::VectorXd e = (x.array() - m).exp();
  return e / e.sum();
}

Eigen::VectorXd label_vector(std::span<const double> labels) {
  return Eigen::Map<const Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
}

bool has_distinct_labels(const QueryGroup& g) {
  if (g.size() < 2) return false;
  const auto [lo, hi] = std::minmax_element(g.labels.begin(), g.labels.end());
  return *lo != *hi;
}

std::size_t check_groups(const std::vector<QueryGroup>& groups, const char* trainer) {
  if (groups.empty()) {
    throw Error(ErrorKind::kInvalidConfig, std::string(trainer) + " needs at least one group");
  }
  const Eigen::Index d = groups.front().features.cols();
  for (const auto& g : groups) {
    if (g.features.cols() != d || static_cast<std::size_t>(g.features.rows()) != g.size() ||
        g.tweet_ids.size() != g.size()) {
      throw Error(ErrorKind::kSchemaMismatch, "query groups disagree on shape",
                  {{"user_id", g.user_id}});
    }
  }
  return static_cast<std::size_t>(d);
}

[[noreturn]] void diverged(const char* trainer, int epoch) {
  throw Error(ErrorKind::kDiverged, std::string(trainer) + " diverged at epoch " +
                                        std::to_string(epoch),
              {{"trainer", trainer}, {"epoch", epoch}});
}

// Shared per-group stochastic gradient loop for linear rankers.
template <typename GroupGrad, typename Objective>
Eigen::VectorXd descend(const std::vector<QueryGroup>& groups, std::vector<std::size_t> active,
                        std::size_t d, int epochs, double lr, double l2, Seed seed,
                        const char* trainer, GroupGrad group_grad, Objective objective) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  if (active.empty()) return w;
  Rng rng(seed);
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    rng.shuffle(active);
    for (std::size_t gi : active) {
      Eigen::VectorXd g = group_grad(w, groups[gi]);
      if (l2 > 0.0) g += 2.0 * l2 * w;
      w -= lr * g;
    }
    if (!w.allFinite() || !std::isfinite(objective(w))) diverged(trainer, epoch);
  }
  return w;
}

}  // namespace

std::size_t QueryGroup::discordant_pairs() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) n += labels[i] > labels[j];
  }
  return n;
}

std::vector<QueryGroup> make_query_groups(const FeatureTable& table, const FeatureMask& mask) {
  const Eigen::MatrixXd X = table.masked(mask);
  std::vector<QueryGroup> out;
  for (const auto& [user, rows] : table.user_rows()) {
    QueryGroup g;
    g.user_id = user;
    g.features.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      g.features.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
      g.labels.push_back(table.labels[rows[i]]);
      g.tweet_ids.push_back(table.tweet_ids[rows[i]]);
    }
    out.push_back(std::move(g));
  }
  return out;
}

Ranking rank_group(const Scorer& model, const QueryGroup& g) {
  const Eigen::VectorXd s = model.score_matrix(g.features);
  return rank_by_scores(g.user_id, g.tweet_ids, std::span<const double>(s.data(), g.size()));
}

RankingSet rank_groups(const Scorer& model, const std::vector<QueryGroup>& groups) {
  RankingSet out;
  for (const auto& g : groups) out.emplace(g.user_id, rank_group(model, g));
  return out;
}

double LinearRanker::score_row(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += weights_[static_cast<Eigen::Index>(j)] * x[j];
  return s;
}

nlohmann::json LinearRanker::to_json() const { return {{"weights", to_std(weights_)}}; }

LinearRanker LinearRanker::from_json(std::string kind, const nlohmann::json& j) {
  return LinearRanker(std::move(kind), from_json_vector(j.at("weights")));
}

// ---- ListNet ----

double listnet_group_loss(const Eigen::VectorXd& scores, std::span<const double> labels,
                          double temperature) {
  const Eigen::VectorXd target = softmax(label_vector(labels) / temperature);
  const double m = scores.maxCoeff();
  const double log_z = m + std::log((scores.array() - m).exp().sum());
  return -(target.array() * (scores.array() - log_z)).sum();
}

Eigen::VectorXd listnet_score_gradient(const Eigen::VectorXd& scores,
                                       std::span<const double> labels, double temperature) {
  return softmax(scores) - softmax(label_vector(labels) / temperature);
}

double listnet_loss(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                    const ListNetConfig& cfg) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (!has_distinct_labels(g)) continue;
    sum += listnet_group_loss(g.features * w, g.labels, cfg.temperature);
    ++n;
  }
  return (n ? sum / static_cast<double>(n) : 0.0) + cfg.l2 * w.squaredNorm();
}

Eigen::VectorXd listnet_gradient(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                                 const ListNetConfig& cfg) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(w.size());
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (!has_distinct_labels(g)) continue;
    grad += g.features.transpose() *
            listnet_score_gradient(g.features * w, g.labels, cfg.temperature);
    ++n;
  }
  if (n) grad /= static_cast<double>(n);
  return grad + 2.0 * cfg.l2 * w;
}

LinearRanker train_listnet(const std::vector<QueryGroup>& groups, const ListNetConfig& cfg) {
  const std::size_t d = check_groups(groups, "listnet");
  if (cfg.epochs < 1 || !(cfg.lr > 0.0) || !(cfg.temperature > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "listnet needs epochs >= 1, lr > 0, temperature > 0");
  }
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (has_distinct_labels(groups[i])) active.push_back(i);
  }
  auto w = descend(
      groups, active, d, cfg.epochs, cfg.lr, cfg.l2, cfg.seed, "listnet",
      [&](const Eigen::VectorXd& w, const QueryGroup& g) -> Eigen::VectorXd {
        return g.features.transpose() *
               listnet_score_gradient(g.features * w, g.labels, cfg.temperature);
      },
      [&](const Eigen::VectorXd& w) { return listnet_loss(w, groups, cfg); });
  return LinearRanker("listnet", std::move(w));
}

// ---- RankingSVM ----

namespace {

// Subgradient of one group's mean hinge; adds to `grad` and returns the
// mean hinge. Zero (and nothing added) for a group without pairs.
double ranksvm_group(const Eigen::VectorXd& w, const QueryGroup& g, Eigen::VectorXd* grad) {
  const Eigen::VectorXd s = g.features * w;
  double hinge = 0.0;
  std::size_t pairs = 0;
  Eigen::VectorXd local = Eigen::VectorXd::Zero(w.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!(g.labels[i] > g.labels[j])) continue;
      ++pairs;
      const double margin = s[static_cast<Eigen::Index>(i)] - s[static_cast<Eigen::Index>(j)];
      if (margin < 1.0) {
        hinge += 1.0 - margin;
        if (grad) {
          local -= (g.features.row(static_cast<Eigen::Index>(i)) -
                    g.features.row(static_cast<Eigen::Index>(j)))
                       .transpose();
        }
      }
    }
  }
  if (!pairs) return 0.0;
  if (grad) *grad += local / static_cast<double>(pairs);
  return hinge / static_cast<double>(pairs);
}

}  // namespace

double ranksvm_objective(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                         const RankSvmConfig& cfg) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (!g.discordant_pairs()) continue;
    sum += ranksvm_group(w, g, nullptr);
    ++n;
  }
  return w.squaredNorm() / (2.0 * cfg.c) + (n ? sum / static_cast<double>(n) : 0.0);
}

Eigen::VectorXd ranksvm_gradient(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                                 const RankSvmConfig& cfg) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(w.size());
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (!g.discordant_pairs()) continue;
    ranksvm_group(w, g, &grad);
    ++n;
  }
  if (n) grad /= static_cast<double>(n);
  return grad + w / cfg.c;
}

LinearRanker train_ranking_svm(const std::vector<QueryGroup>& groups, const RankSvmConfig& cfg) {
  const std::size_t d = check_groups(groups, "ranksvm");
  if (cfg.epochs < 1 || !(cfg.lr > 0.0) || !(cfg.c > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "ranksvm needs epochs >= 1, lr > 0, c > 0");
  }
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].discordant_pairs()) active.push_back(i);
  }
  auto w = descend(
      groups, active, d, cfg.epochs, cfg.lr, 0.0, cfg.seed, "ranksvm",
      [&](const Eigen::VectorXd& w, const QueryGroup& g) -> Eigen::VectorXd {
        Eigen::VectorXd grad = w / cfg.c;
        ranksvm_group(w, g, &grad);
        return grad;
      },
      [&](const Eigen::VectorXd& w) { return ranksvm_objective(w, groups, cfg); });
  return LinearRanker("ranksvm", std::move(w));
}

// ---- ListMLE ----

std::vector<std::size_t> listmle_permutation(std::span<const double> labels,
                                             std::span<const std::string> ids) {
  std::vector<std::size_t> perm(labels.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] > labels[b];
    return ids[a] < ids[b];
  });
  return perm;
}

namespace {

// log sum_{j >= i} exp(s_perm[j]) for every i.
std::vector<double> suffix_log_sum_exp(const Eigen::VectorXd& scores,
                                       const std::vector<std::size_t>& perm) {
  std::vector<double> out(perm.size());
  double acc = -std::numeric_limits<double>::infinity();
  for (std::size_t i = perm.size(); i-- > 0;) {
    const double s = scores[static_cast<Eigen::Index>(perm[i])];
    const double m = std::max(acc, s);
    acc = m + std::log(std::exp(acc - m) + std::exp(s - m));
    out[i] = acc;
  }
  return out;
}

}  // namespace

double listmle_group_loss(const Eigen::VectorXd& scores, std::span<const double> labels,
                          std::span<const std::string> ids) {
  const auto perm = listmle_permutation(labels, ids);
  const auto lse = suffix_log_sum_exp(scores, perm);
  double loss = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    loss += lse[i] - scores[static_cast<Eigen::Index>(perm[i])];
  }
  return loss;
}

Eigen::VectorXd listmle_score_gradient(const Eigen::VectorXd& scores,
                                       std::span<const double> labels,
                                       std::span<const std::string> ids) {
  const auto perm = listmle_permutation(labels, ids);
  const auto lse = suffix_log_sum_exp(scores, perm);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(scores.size());
  // Item at position m appears in the normalisers of positions 0..m.
  for (std::size_t m = 0; m < perm.size(); ++m) {
    const double s = scores[static_cast<Eigen::Index>(perm[m])];
    double p = 0.0;
    for (std::size_t i = 0; i <= m; ++i) p += std::exp(s - lse[i]);
    grad[static_cast<Eigen::Index>(perm[m])] = p - 1.0;
  }
  return grad;
}

double listmle_loss(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                    const ListMleConfig& cfg) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    sum += listmle_group_loss(g.features * w, g.labels, g.tweet_ids);
    ++n;
  }
  return (n ? sum / static_cast<double>(n) : 0.0) + cfg.l2 * w.squaredNorm();
}

Eigen::VectorXd listmle_gradient(const Eigen::VectorXd& w, const std::vector<QueryGroup>& groups,
                                 const ListMleConfig& cfg) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(w.size());
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    grad += g.features.transpose() * listmle_score_gradient(g.features * w, g.labels, g.tweet_ids);
    ++n;
  }
  if (n) grad /= static_cast<double>(n);
  return grad + 2.0 * cfg.l2 * w;
}

LinearRanker train_listmle(const std::vector<QueryGroup>& groups, const ListMleConfig& cfg) {
  const std::size_t d = check_groups(groups, "listmle");
  if (cfg.epochs < 1 || !(cfg.lr > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "listmle needs epochs >= 1 and lr > 0");
  }
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].size() >= 2) active.push_back(i);
  }
  auto w = descend(
      groups, active, d, cfg.epochs, cfg.lr, cfg.l2, cfg.seed, "listmle",
      [&](const Eigen::VectorXd& w, const QueryGroup& g) -> Eigen::VectorXd {
        return g.features.transpose() *
               listmle_score_gradient(g.features * w, g.labels, g.tweet_ids);
      },
      [&](const Eigen::VectorXd& w) { return listmle_loss(w, groups, cfg); });
  return LinearRanker("listmle", std::move(w));
}

}  // namespace engrank
