#include <cmath>
#include <numeric>

#include "engrank/error.hpp"
#include "engrank/ltr.hpp"

namespace engrank {

double BoostedRanker::score_row(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& r : rounds_) s += r.alpha * r.direction * x[r.feature];
  return s;
}

nlohmann::json BoostedRanker::to_json() const {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : rounds_) {
    rounds.push_back({{"feature", r.feature}, {"direction", r.direction}, {"alpha", r.alpha}});
  }
  return {{"num_features", num_features_}, {"rounds", rounds}};
}

BoostedRanker BoostedRanker::from_json(const nlohmann::json& j) {
  std::vector<Round> rounds;
  for (const auto& r : j.at("rounds")) {
    rounds.push_back({r.at("feature").get<std::size_t>(), r.at("direction").get<int>(),
                      r.at("alpha").get<double>()});
  }
  return BoostedRanker(std::move(rounds), j.at("num_features").get<std::size_t>());
}

BoostedRanker train_adarank(const std::vector<QueryGroup>& groups, const AdaRankConfig& cfg) {
  if (groups.empty()) throw Error(ErrorKind::kInvalidConfig, "adarank needs at least one group");
  if (cfg.rounds < 1) throw Error(ErrorKind::kInvalidConfig, "adarank needs rounds >= 1");
  const std::size_t d = static_cast<std::size_t>(groups.front().features.cols());
  const std::size_t q = groups.size();
  // Floor on the (1 - E) mass so a perfect weak ranker gets a finite alpha.
  constexpr double kMinResidualMass = 1e-12;

  // Per-group metric of every weak ranker; candidate c = 2 * feature + (c odd ? -1 : +1).
  const std::size_t candidates = 2 * d;
  std::vector<std::vector<double>> weak(candidates, std::vector<double>(q));
  std::vector<double> baseline(q);
  for (std::size_t gi = 0; gi < q; ++gi) {
    const auto& g = groups[gi];
    if (static_cast<std::size_t>(g.features.cols()) != d) {
      throw Error(ErrorKind::kSchemaMismatch, "query groups disagree on feature width");
    }
    const std::vector<double> zeros(g.size(), 0.0);
    baseline[gi] = ndcg_of_scores(zeros, g.labels, g.tweet_ids, cfg.metric);
    std::vector<double> s(g.size());
    for (std::size_t f = 0; f < d; ++f) {
      for (int dir = 0; dir < 2; ++dir) {
        const double sign = dir == 0 ? 1.0 : -1.0;
        for (std::size_t r = 0; r < g.size(); ++r) {
          s[r] = sign * g.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f));
        }
        weak[2 * f + static_cast<std::size_t>(dir)][gi] =
            ndcg_of_scores(s, g.labels, g.tweet_ids, cfg.metric);
      }
    }
  }

  std::vector<double> weight(q, 1.0 / static_cast<double>(q));
  std::vector<BoostedRanker::Round> rounds;
  for (int t = 0; t < cfg.rounds; ++t) {
    std::size_t best = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates; ++c) {
      double gain_sum = 0.0;
      for (std::size_t gi = 0; gi < q; ++gi) gain_sum += weight[gi] * (weak[c][gi] - baseline[gi]);
      if (gain_sum > best_gain + 1e-15) {
        best_gain = gain_sum;
        best = c;
      }
    }
    if (!(best_gain > 1e-12)) {
      if (t == 0) {
        throw Error(ErrorKind::kNoUsefulWeakRanker,
                    "no single-feature ranker improves on the tie order",
                    {{"best_weighted_gain", best_gain}});
      }
      break;
    }
    double up = 0.0, down = 0.0;
    for (std::size_t gi = 0; gi < q; ++gi) {
      up += weight[gi] * (1.0 + weak[best][gi]);
      down += weight[gi] * (1.0 - weak[best][gi]);
    }
    const bool perfect = down <= kMinResidualMass;
    const double alpha = 0.5 * std::log(up / std::max(down, kMinResidualMass));
    rounds.push_back({best / 2, best % 2 == 0 ? 1 : -1, alpha});
    if (perfect) break;

    // Re-weight users by how badly the combined ranker still does on them.
    const BoostedRanker combined(rounds, d);
    double z = 0.0;
    for (std::size_t gi = 0; gi < q; ++gi) {
      const auto& g = groups[gi];
      const Eigen::VectorXd s = combined.score_matrix(g.features);
      const double e = ndcg_of_scores(std::span<const double>(s.data(), g.size()), g.labels,
                                      g.tweet_ids, cfg.metric);
      weight[gi] = std::exp(-e);
      z += weight[gi];
    }
    for (auto& w : weight) w /= z;
  }
  return BoostedRanker(std::move(rounds), d);
}

}  // namespace engrank
