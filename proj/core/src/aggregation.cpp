#include "engrank/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "engrank/dataset.hpp"
#include "engrank/error.hpp"
#include "parallel.hpp"

namespace engrank {
namespace {

[[noreturn]] void id_set_mismatch(const std::string& user, const std::string& why) {
  throw Error(ErrorKind::kIdSetMismatch, "rankings of user " + user + " disagree: " + why,
              {{"user_id", user}, {"reason", why}});
}

std::unordered_map<std::string, std::size_t> positions(const Ranking& r) {
  std::unordered_map<std::string, std::size_t> pos;
  pos.reserve(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!pos.emplace(r.ordered_ids[i], i).second) {
      id_set_mismatch(r.user_id, "duplicate id " + r.ordered_ids[i]);
    }
  }
  return pos;
}

std::uint64_t merge_count(std::vector<std::size_t>& v, std::vector<std::size_t>& tmp,
                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[i] <= v[j]) {
      tmp[k++] = v[i++];
    } else {
      inv += mid - i;
      tmp[k++] = v[j++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
            tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

// Cost of placing a directly or indirectly above b.
double pair_cost(const PreferenceMatrix& p, AggregationObjective o, std::size_t a, std::size_t b) {
  const double disagree = p.prefer(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
  return o == AggregationObjective::kMinimizeDisagreement ? disagree : -disagree;
}

double order_distance(const PreferenceMatrix& p, const std::vector<std::size_t>& order) {
  double cost = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      cost += p.prefer(static_cast<Eigen::Index>(order[j]), static_cast<Eigen::Index>(order[i]));
    }
  }
  return cost;
}

bool nearly_equal(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

Consensus make_consensus(const PreferenceMatrix& p, const std::vector<std::size_t>& order,
                         const std::string& user, bool exact) {
  Consensus c;
  c.ranking.user_id = user;
  for (std::size_t i : order) c.ranking.ordered_ids.push_back(p.ids[i]);
  c.cost = order_distance(p, order);
  c.exact = exact;
  return c;
}

std::vector<const Ranking*> user_rankings(const WeightedRankerSet& set, const std::string& user) {
  std::vector<const Ranking*> out;
  for (std::size_t i = 0; i < set.outputs.size(); ++i) {
    auto it = set.outputs[i].find(user);
    if (it == set.outputs[i].end()) {
      id_set_mismatch(user, "ranker " + (i < set.names.size() ? set.names[i] : std::to_string(i)) +
                                " has no ranking");
    }
    out.push_back(&it->second);
  }
  return out;
}

}  // namespace

std::size_t kendall_tau(const Ranking& a, const Ranking& b) {
  if (a.size() != b.size()) id_set_mismatch(a.user_id, "lists differ in length");
  const auto pos_b = positions(b);
  positions(a);  // rejects duplicates in a
  std::vector<std::size_t> seq;
  seq.reserve(a.size());
  for (const auto& id : a.ordered_ids) {
    auto it = pos_b.find(id);
    if (it == pos_b.end()) id_set_mismatch(a.user_id, "id " + id + " missing from one list");
    seq.push_back(it->second);
  }
  std::vector<std::size_t> tmp(seq.size());
  return static_cast<std::size_t>(merge_count(seq, tmp, 0, seq.size()));
}

std::string objective_name(AggregationObjective o) {
  return o == AggregationObjective::kMinimizeDisagreement ? "minimize-disagreement"
                                                          : "maximize-agreement";
}

AggregationObjective parse_objective(const std::string& name) {
  if (name == "minimize-disagreement") return AggregationObjective::kMinimizeDisagreement;
  if (name == "maximize-agreement") return AggregationObjective::kMaximizeAgreement;
  throw Error(ErrorKind::kInvalidConfig,
              "objective must be minimize-disagreement or maximize-agreement",
              {{"objective", name}});
}

void WeightedRankerSet::validate() const {
  if (outputs.empty()) throw Error(ErrorKind::kEmptyRankerSet, "no base rankers");
  if (weights.size() != outputs.size()) {
    throw Error(ErrorKind::kInvalidConfig, "one weight per ranker required",
                {{"rankers", outputs.size()}, {"weights", weights.size()}});
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::kInvalidConfig, "weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::kInvalidConfig, "weights must not all be zero");
}

std::vector<std::string> WeightedRankerSet::users() const {
  if (outputs.empty()) throw Error(ErrorKind::kEmptyRankerSet, "no base rankers");
  std::vector<std::string> users;
  for (const auto& [u, r] : outputs.front()) users.push_back(u);
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    if (outputs[i].size() != users.size()) {
      throw Error(ErrorKind::kIdSetMismatch, "rankers cover different user sets");
    }
    for (const auto& u : users) {
      if (!outputs[i].count(u)) id_set_mismatch(u, "user missing from a ranker");
    }
  }
  return users;
}

PreferenceMatrix build_preferences(std::span<const Ranking* const> rankings,
                                   std::span<const double> weights) {
  if (rankings.empty()) throw Error(ErrorKind::kEmptyRankerSet, "no rankings to aggregate");
  const Ranking& first = *rankings.front();
  PreferenceMatrix p;
  p.ids = first.ordered_ids;
  std::sort(p.ids.begin(), p.ids.end());
  const std::size_t m = p.ids.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m; ++i) {
    if (!index.emplace(p.ids[i], i).second) id_set_mismatch(first.user_id, "duplicate id");
  }
  p.prefer = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<std::size_t> order(m);
  for (std::size_t r = 0; r < rankings.size(); ++r) {
    const Ranking& ranking = *rankings[r];
    if (ranking.size() != m) id_set_mismatch(first.user_id, "lists differ in length");
    std::vector<bool> seen(m, false);
    for (std::size_t pos = 0; pos < m; ++pos) {
      auto it = index.find(ranking.ordered_ids[pos]);
      if (it == index.end() || seen[it->second]) {
        id_set_mismatch(first.user_id, "id sets differ");
      }
      seen[it->second] = true;
      order[pos] = it->second;
    }
    const double w = weights[r];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        p.prefer(static_cast<Eigen::Index>(order[i]), static_cast<Eigen::Index>(order[j])) += w;
      }
    }
  }
  return p;
}

Consensus kemeny_exact(const PreferenceMatrix& p, AggregationObjective objective) {
  const std::size_t m = p.ids.size();
  if (m > 20) {
    throw Error(ErrorKind::kInvalidConfig, "exact Kemeny search limited to 20 items",
                {{"items", m}});
  }
  const std::size_t full = (std::size_t{1} << m) - 1;
  // cost_first(x, S): cost of putting x above every other member of S.
  auto cost_first = [&](std::size_t x, std::size_t set) {
    double c = 0.0;
    for (std::size_t y = 0; y < m; ++y) {
      if (y != x && (set >> y & 1U)) c += pair_cost(p, objective, x, y);
    }
    return c;
  };
  // best[S] = optimal cost of ordering the items of S among themselves.
  std::vector<double> best(full + 1, 0.0);
  for (std::size_t set = 1; set <= full; ++set) {
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < m; ++x) {
      if (!(set >> x & 1U)) continue;
      b = std::min(b, cost_first(x, set) + best[set & ~(std::size_t{1} << x)]);
    }
    best[set] = b;
  }
  // Greedy reconstruction: smallest id achieving the optimum at each step
  // gives the lexicographically smallest optimal order.
  std::vector<std::size_t> order;
  std::size_t set = full;
  while (set) {
    for (std::size_t x = 0; x < m; ++x) {
      if (!(set >> x & 1U)) continue;
      const std::size_t rest = set & ~(std::size_t{1} << x);
      if (nearly_equal(cost_first(x, set) + best[rest], best[set])) {
        order.push_back(x);
        set = rest;
        break;
      }
    }
  }
  return make_consensus(p, order, "", true);
}

Consensus kemeny_local_search(const PreferenceMatrix& p, AggregationObjective objective) {
  const std::size_t m = p.ids.size();
  // Borda start: items by total weighted preference over others.
  std::vector<double> wins(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a != b) wins[a] -= pair_cost(p, objective, a, b);
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return wins[a] > wins[b]; });

  auto c = [&](std::size_t a, std::size_t b) { return pair_cost(p, objective, a, b); };
  auto improves = [](double delta) { return delta < -1e-12; };
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double delta = c(order[i + 1], order[i]) - c(order[i], order[i + 1]);
      if (improves(delta)) {
        std::swap(order[i], order[i + 1]);
        improved = true;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t x = order[i];
      double best_delta = 0.0;
      std::size_t best_j = i;
      double delta = 0.0;
      for (std::size_t j = i + 1; j < m; ++j) {  // move x below order[j]
        delta += c(order[j], x) - c(x, order[j]);
        if (delta < best_delta - 1e-12) {
          best_delta = delta;
          best_j = j;
        }
      }
      delta = 0.0;
      for (std::size_t j = i; j-- > 0;) {  // move x above order[j]
        delta += c(x, order[j]) - c(order[j], x);
        if (delta < best_delta - 1e-12) {
          best_delta = delta;
          best_j = j;
        }
      }
      if (best_j != i && improves(best_delta)) {
        order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
        order.insert(order.begin() + static_cast<std::ptrdiff_t>(best_j), x);
        improved = true;
      }
    }
  }
  return make_consensus(p, order, "", false);
}

Consensus aggregate(const WeightedRankerSet& set, const std::string& user_id,
                    const AggregateOptions& options) {
  set.validate();
  const auto rankings = user_rankings(set, user_id);
  const PreferenceMatrix p = build_preferences(rankings, set.weights);
  Consensus c = (!options.force_heuristic && p.ids.size() <= options.exact_threshold)
                    ? kemeny_exact(p, options.objective)
                    : kemeny_local_search(p, options.objective);
  c.ranking.user_id = user_id;
  return c;
}

RankingSet aggregate_all(const WeightedRankerSet& set, const AggregateOptions& options) {
  RankingSet out;
  for (const auto& user : set.users()) out.emplace(user, aggregate(set, user, options).ranking);
  return out;
}

Ranking borda(const WeightedRankerSet& set, const std::string& user_id) {
  set.validate();
  const auto rankings = user_rankings(set, user_id);
  // Validates id sets.
  const PreferenceMatrix p = build_preferences(rankings, set.weights);
  const std::size_t m = p.ids.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m; ++i) index[p.ids[i]] = i;
  std::vector<double> points(m, 0.0);
  for (std::size_t r = 0; r < rankings.size(); ++r) {
    for (std::size_t pos = 0; pos < m; ++pos) {
      points[index[rankings[r]->ordered_ids[pos]]] +=
          set.weights[r] * static_cast<double>(m - pos);
    }
  }
  Ranking out = rank_by_scores(user_id, p.ids, points);
  return out;
}

RankingSet borda_all(const WeightedRankerSet& set) {
  RankingSet out;
  for (const auto& user : set.users()) out.emplace(user, borda(set, user));
  return out;
}

double weighted_kendall_cost(const Ranking& r, std::span<const Ranking* const> inputs,
                             std::span<const double> weights) {
  double cost = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    cost += weights[i] * static_cast<double>(kendall_tau(r, *inputs[i]));
  }
  return cost;
}

std::vector<double> sample_simplex(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& v : w) {
    v = rng.exponential();
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

WeightSearchResult learn_weights(const std::vector<RankingSet>& outputs,
                                 const std::map<std::string, double>& labels,
                                 const WeightSearchConfig& cfg) {
  if (outputs.size() < 2) {
    throw Error(ErrorKind::kInvalidConfig, "weight search needs at least two rankers",
                {{"rankers", outputs.size()}});
  }
  if (cfg.samples < 1 && !cfg.include_uniform) {
    throw Error(ErrorKind::kInvalidConfig, "weight search needs at least one candidate");
  }
  WeightedRankerSet probe;
  probe.outputs = outputs;
  probe.weights.assign(outputs.size(), 1.0);
  const auto users = probe.users();
  const FoldPlan plan = split_user_folds(users, cfg.folds, derive_seed(cfg.seed, "folds"));

  // Per user: per-ranker preference matrices (so each candidate only sums).
  struct UserData {
    std::string user;
    std::vector<PreferenceMatrix> per_ranker;
    std::vector<double> labels;  // aligned with per_ranker[0].ids
    int fold = 0;
  };
  std::vector<UserData> data;
  bool any_informative = false;
  for (const auto& user : users) {
    UserData u;
    u.user = user;
    u.fold = plan.assignment.at(user);
    const auto rankings = user_rankings(probe, user);
    for (const Ranking* r : rankings) {
      const double one = 1.0;
      u.per_ranker.push_back(build_preferences(std::span<const Ranking* const>(&r, 1),
                                               std::span<const double>(&one, 1)));
    }
    // Cross-check id sets across rankers.
    build_preferences(rankings, probe.weights);
    for (const auto& id : u.per_ranker.front().ids) {
      auto it = labels.find(id);
      if (it == labels.end()) {
        throw Error(ErrorKind::kMissingLabel, "no label for tweet " + id,
                    {{"tweet_id", id}, {"user_id", user}});
      }
      u.labels.push_back(it->second);
    }
    if (!u.labels.empty() &&
        *std::max_element(u.labels.begin(), u.labels.end()) !=
            *std::min_element(u.labels.begin(), u.labels.end())) {
      any_informative = true;
    }
    data.push_back(std::move(u));
  }
  if (!any_informative) {
    throw Error(ErrorKind::kDegenerateLabels, "every user's labels are tied");
  }

  WeightSearchResult result;
  Rng rng(derive_seed(cfg.seed, "simplex"));
  if (cfg.include_uniform) {
    result.candidates.emplace_back(outputs.size(), 1.0 / static_cast<double>(outputs.size()));
  }
  for (int s = 0; s < cfg.samples; ++s) result.candidates.push_back(sample_simplex(rng, outputs.size()));

  const std::size_t n_candidates = result.candidates.size();
  std::vector<std::vector<double>> fold_scores(n_candidates);
  auto evaluate = [&](std::size_t c) {
    const auto& w = result.candidates[c];
    std::vector<double> sums(static_cast<std::size_t>(cfg.folds), 0.0);
    std::vector<double> counts(static_cast<std::size_t>(cfg.folds), 0.0);
    for (const auto& u : data) {
      PreferenceMatrix p;
      p.ids = u.per_ranker.front().ids;
      p.prefer = Eigen::MatrixXd::Zero(u.per_ranker.front().prefer.rows(),
                                       u.per_ranker.front().prefer.cols());
      for (std::size_t r = 0; r < w.size(); ++r) p.prefer += w[r] * u.per_ranker[r].prefer;
      const Consensus consensus =
          (!cfg.aggregation.force_heuristic && p.ids.size() <= cfg.aggregation.exact_threshold)
              ? kemeny_exact(p, cfg.aggregation.objective)
              : kemeny_local_search(p, cfg.aggregation.objective);
      std::unordered_map<std::string, double> label_of;
      for (std::size_t i = 0; i < p.ids.size(); ++i) label_of[p.ids[i]] = u.labels[i];
      std::vector<double> ranked;
      for (const auto& id : consensus.ranking.ordered_ids) ranked.push_back(label_of[id]);
      sums[static_cast<std::size_t>(u.fold)] += ndcg_of_ranked_labels(ranked, cfg.metric);
      counts[static_cast<std::size_t>(u.fold)] += 1.0;
    }
    std::vector<double> per_fold(sums.size());
    for (std::size_t f = 0; f < sums.size(); ++f) per_fold[f] = sums[f] / counts[f];
    fold_scores[c] = std::move(per_fold);
  };

  detail::parallel_for(n_candidates, cfg.threads, evaluate);

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n_candidates; ++c) {
    const auto& f = fold_scores[c];
    const double score = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
    result.candidate_scores.push_back(score);
    if (score > best) {
      best = score;
      result.best_index = c;
    }
  }
  result.weights = result.candidates[result.best_index];
  result.cv_score = best;
  result.fold_scores = fold_scores[result.best_index];
  return result;
}

}  // namespace engrank
