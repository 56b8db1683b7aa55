#include <algorithm>
#include <cmath>
#include <numeric>

#include "engrank/error.hpp"
#include "engrank/ltr.hpp"

namespace engrank {
namespace {

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// log(1 + exp(-x)) without overflow.
double log1p_exp_neg(double x) {
  return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

NeuralRanker NeuralRanker::initialize(std::string kind, std::size_t inputs, std::size_t hidden,
                                      Seed seed, bool random_output) {
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(inputs, 1)));
  Eigen::MatrixXd w1(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(inputs));
  for (Eigen::Index r = 0; r < w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < w1.cols(); ++c) w1(r, c) = rng.uniform(-scale, scale);
  }
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
  if (random_output) {
    const double out_scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(hidden, 1)));
    for (Eigen::Index h = 0; h < w2.size(); ++h) w2[h] = rng.uniform(-out_scale, out_scale);
  }
  return NeuralRanker(std::move(kind), std::move(w1),
                      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden)), std::move(w2), 0.0);
}

double NeuralRanker::score_row(std::span<const double> x) const {
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd pre = w1_ * xv + b1_;
  double s = b2_;
  for (Eigen::Index h = 0; h < pre.size(); ++h) s += w2_[h] * sigmoid(pre[h]);
  return s;
}

Eigen::VectorXd NeuralRanker::forward(const Eigen::MatrixXd& X, Eigen::MatrixXd* hidden) const {
  Eigen::MatrixXd H = (X * w1_.transpose()).rowwise() + b1_.transpose();
  H = H.unaryExpr([](double v) { return sigmoid(v); });
  Eigen::VectorXd s = (H * w2_).array() + b2_;
  if (hidden) *hidden = std::move(H);
  return s;
}

std::size_t NeuralRanker::parameter_count() const {
  return static_cast<std::size_t>(w1_.size() + b1_.size() + w2_.size() + 1);
}

Eigen::VectorXd NeuralRanker::parameters() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < w1_.rows(); ++r) {
    for (Eigen::Index c = 0; c < w1_.cols(); ++c) p[k++] = w1_(r, c);
  }
  for (Eigen::Index h = 0; h < b1_.size(); ++h) p[k++] = b1_[h];
  for (Eigen::Index h = 0; h < w2_.size(); ++h) p[k++] = w2_[h];
  p[k] = b2_;
  return p;
}

void NeuralRanker::set_parameters(const Eigen::VectorXd& p) {
  if (static_cast<std::size_t>(p.size()) != parameter_count()) {
    throw Error(ErrorKind::kSchemaMismatch, "parameter vector has the wrong length");
  }
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < w1_.rows(); ++r) {
    for (Eigen::Index c = 0; c < w1_.cols(); ++c) w1_(r, c) = p[k++];
  }
  for (Eigen::Index h = 0; h < b1_.size(); ++h) b1_[h] = p[k++];
  for (Eigen::Index h = 0; h < w2_.size(); ++h) w2_[h] = p[k++];
  b2_ = p[k];
}

Eigen::VectorXd NeuralRanker::backward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& H,
                                       const Eigen::VectorXd& g) const {
  const Eigen::Index hid = w1_.rows();
  const Eigen::Index d = w1_.cols();
  // delta(i, h) = g_i * w2_h * H_ih (1 - H_ih)
  const Eigen::MatrixXd delta =
      (H.array() * (1.0 - H.array())).rowwise() * w2_.transpose().array();
  const Eigen::MatrixXd scaled = delta.array().colwise() * g.array();
  const Eigen::MatrixXd gw1 = scaled.transpose() * X;  // hid x d
  Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < hid; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) out[k++] = gw1(r, c);
  }
  out.segment(k, hid) = scaled.colwise().sum().transpose();
  k += hid;
  out.segment(k, hid) = H.transpose() * g;
  k += hid;
  out[k] = g.sum();
  return out;
}

nlohmann::json NeuralRanker::to_json() const {
  std::vector<std::vector<double>> w1(static_cast<std::size_t>(w1_.rows()));
  for (Eigen::Index r = 0; r < w1_.rows(); ++r) {
    for (Eigen::Index c = 0; c < w1_.cols(); ++c) w1[static_cast<std::size_t>(r)].push_back(w1_(r, c));
  }
  return {{"inputs", w1_.cols()}, {"hidden", w1_.rows()}, {"activation", "logistic"},
          {"w1", w1},             {"b1", to_std(b1_)},    {"w2", to_std(w2_)},
          {"b2", b2_}};
}

NeuralRanker NeuralRanker::from_json(std::string kind, const nlohmann::json& j) {
  const auto rows = j.at("w1").get<std::vector<std::vector<double>>>();
  const auto inputs = j.at("inputs").get<Eigen::Index>();
  Eigen::MatrixXd w1(static_cast<Eigen::Index>(rows.size()), inputs);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != inputs) {
      throw Error(ErrorKind::kSchemaMismatch, "neural ranker w1 row has wrong width");
    }
    for (Eigen::Index c = 0; c < inputs; ++c) {
      w1(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
  }
  return NeuralRanker(std::move(kind), std::move(w1), vec(j.at("b1")), vec(j.at("w2")),
                      j.at("b2").get<double>());
}

// ---- RankNet ----

namespace {

// Mean pairwise logistic loss and its gradient w.r.t. the scores.
double ranknet_score_terms(const Eigen::VectorXd& s, const std::vector<double>& labels,
                           Eigen::VectorXd* grad) {
  double loss = 0.0;
  std::size_t pairs = 0;
  if (grad) grad->setZero(s.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (!(labels[i] > labels[j])) continue;
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      const double diff = s[ii] - s[jj];
      loss += log1p_exp_neg(diff);
      if (grad) {
        const double rho = sigmoid(-diff);
        (*grad)[ii] -= rho;
        (*grad)[jj] += rho;
      }
      ++pairs;
    }
  }
  if (!pairs) return 0.0;
  if (grad) *grad /= static_cast<double>(pairs);
  return loss / static_cast<double>(pairs);
}

std::size_t check_neural(const std::vector<QueryGroup>& groups, const NeuralRankConfig& cfg,
                         const char* trainer) {
  if (groups.empty()) {
    throw Error(ErrorKind::kInvalidConfig, std::string(trainer) + " needs at least one group");
  }
  if (cfg.hidden < 1 || cfg.epochs < 1 || !(cfg.lr > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig,
                std::string(trainer) + " needs hidden >= 1, epochs >= 1, lr > 0");
  }
  const Eigen::Index d = groups.front().features.cols();
  for (const auto& g : groups) {
    if (g.features.cols() != d) {
      throw Error(ErrorKind::kSchemaMismatch, "query groups disagree on feature width");
    }
  }
  return static_cast<std::size_t>(d);
}

template <typename ScoreGrad>
NeuralRanker train_neural(const std::vector<QueryGroup>& groups, const NeuralRankConfig& cfg,
                          const char* trainer, ScoreGrad score_grad) {
  const std::size_t d = check_neural(groups, cfg, trainer);
  NeuralRanker net = NeuralRanker::initialize(trainer, d, static_cast<std::size_t>(cfg.hidden),
                                              derive_seed(cfg.seed, "init"), cfg.random_output_init);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].discordant_pairs()) active.push_back(i);
  }
  if (active.empty()) return net;
  Rng rng(derive_seed(cfg.seed, "order"));
  Eigen::VectorXd params = net.parameters();
  Eigen::MatrixXd H;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(active);
    for (std::size_t gi : active) {
      const auto& g = groups[gi];
      const Eigen::VectorXd s = net.forward(g.features, &H);
      const Eigen::VectorXd gs = score_grad(s, g);
      params -= cfg.lr * net.backward(g.features, H, gs);
      net.set_parameters(params);
    }
    if (!params.allFinite()) {
      throw Error(ErrorKind::kDiverged,
                  std::string(trainer) + " diverged at epoch " + std::to_string(epoch),
                  {{"trainer", trainer}, {"epoch", epoch}});
    }
  }
  return net;
}

}  // namespace

double ranknet_group_loss(const NeuralRanker& net, const QueryGroup& g) {
  return ranknet_score_terms(net.forward(g.features), g.labels, nullptr);
}

Eigen::VectorXd ranknet_group_gradient(const NeuralRanker& net, const QueryGroup& g) {
  Eigen::MatrixXd H;
  const Eigen::VectorXd s = net.forward(g.features, &H);
  Eigen::VectorXd gs;
  ranknet_score_terms(s, g.labels, &gs);
  return net.backward(g.features, H, gs);
}

NeuralRanker train_ranknet(const std::vector<QueryGroup>& groups, const NeuralRankConfig& cfg) {
  return train_neural(groups, cfg, "ranknet",
                      [](const Eigen::VectorXd& s, const QueryGroup& g) {
                        Eigen::VectorXd gs;
                        const double loss = ranknet_score_terms(s, g.labels, &gs);
                        if (!std::isfinite(loss)) gs.setConstant(std::nan(""));
                        return gs;
                      });
}

// ---- LambdaRank ----

std::vector<PairLambda> lambdarank_pairs(const Eigen::VectorXd& scores,
                                         std::span<const double> labels,
                                         std::span<const std::string> ids,
                                         const NdcgOptions& metric) {
  const std::size_t n = labels.size();
  std::vector<PairLambda> out;
  const double idcg = ideal_dcg_at_k(labels, metric.k, metric.gain);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores[static_cast<Eigen::Index>(a)], sb = scores[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return ids[a] < ids[b];
  });
  std::vector<double> disc(n, 0.0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (pos < static_cast<std::size_t>(metric.k)) disc[order[pos]] = discount(pos);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(labels[i] > labels[j])) continue;
      PairLambda p;
      p.better = i;
      p.worse = j;
      p.delta_ndcg = idcg > 0.0 ? std::fabs((gain(labels[i], metric.gain) -
                                             gain(labels[j], metric.gain)) *
                                            (disc[i] - disc[j])) /
                                      idcg
                                : 0.0;
      p.lambda = p.delta_ndcg * sigmoid(-(scores[static_cast<Eigen::Index>(i)] -
                                          scores[static_cast<Eigen::Index>(j)]));
      out.push_back(p);
    }
  }
  return out;
}

Eigen::VectorXd lambdarank_score_gradient(const Eigen::VectorXd& scores,
                                          std::span<const double> labels,
                                          std::span<const std::string> ids,
                                          const NdcgOptions& metric) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(scores.size());
  for (const auto& p : lambdarank_pairs(scores, labels, ids, metric)) {
    g[static_cast<Eigen::Index>(p.better)] -= p.lambda;
    g[static_cast<Eigen::Index>(p.worse)] += p.lambda;
  }
  return g;
}

NeuralRanker train_lambdarank(const std::vector<QueryGroup>& groups, const NeuralRankConfig& cfg) {
  return train_neural(groups, cfg, "lambdarank",
                      [&](const Eigen::VectorXd& s, const QueryGroup& g) {
                        return lambdarank_score_gradient(s, g.labels, g.tweet_ids, cfg.metric);
                      });
}

}  // namespace engrank
