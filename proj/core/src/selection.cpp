#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "engrank/error.hpp"
#include "engrank/evaluation.hpp"
#include "parallel.hpp"

namespace engrank {
namespace {

const char* kind_key(ParamRange::Kind k) {
  switch (k) {
    case ParamRange::Kind::kLogUniform: return "log_uniform";
    case ParamRange::Kind::kUniform: return "uniform";
    case ParamRange::Kind::kInt: return "int";
    case ParamRange::Kind::kCategorical: return "choice";
  }
  return "uniform";
}

ParamRange range(std::string name, ParamRange::Kind kind, double lo, double hi) {
  ParamRange r;
  r.name = std::move(name);
  r.kind = kind;
  r.lo = lo;
  r.hi = hi;
  return r;
}

ParamRange choice(std::string name, std::vector<nlohmann::json> choices) {
  ParamRange r;
  r.name = std::move(name);
  r.kind = ParamRange::Kind::kCategorical;
  r.choices = std::move(choices);
  return r;
}

nlohmann::json overlay(const nlohmann::json& base, const nlohmann::json& top) {
  nlohmann::json out = base.is_object() ? base : nlohmann::json::object();
  for (const auto& [k, v] : top.items()) out[k] = v;
  return out;
}

}  // namespace

CvResult cross_validate(const Trainer& trainer, const FeatureTable& table,
                        const FeatureMask& mask, const FoldPlan& plan,
                        const NdcgOptions& metric) {
  CvResult out;
  const auto labels = table.label_map();
  for (int f = 0; f < plan.k; ++f) {
    const auto held_out = plan.fold_users(f);
    const TrainedModel model = train_model(trainer.name, trainer.params,
                                           table.select_users(plan.users_outside(f)), mask,
                                           trainer.options);
    const RankingSet ranked = model.rank(table.select_users(held_out));
    const MetricReport report = mean_ndcg(ranked, labels, metric);
    out.fold_scores.push_back(report.mean);
    out.out_of_fold.insert(ranked.begin(), ranked.end());
  }
  out.mean = std::accumulate(out.fold_scores.begin(), out.fold_scores.end(), 0.0) /
             static_cast<double>(out.fold_scores.size());
  return out;
}

EliminationResult backward_elimination_trace(const Trainer& trainer, const FeatureTable& table,
                                             const EliminationConfig& cfg) {
  cfg.start.validate();
  const FoldPlan plan = split_user_folds(table.users(), cfg.folds, cfg.seed);
  EliminationResult out;
  out.mask = cfg.start;
  out.baseline_score = cross_validate(trainer, table, out.mask, plan, cfg.metric).mean;
  out.final_score = out.baseline_score;

  const std::size_t limit = cfg.max_removals < 0 ? std::numeric_limits<std::size_t>::max()
                                                 : static_cast<std::size_t>(cfg.max_removals);
  while (out.steps.size() < limit && out.mask.count() > 1) {
    const auto active = out.mask.indices();
    std::vector<double> scores(active.size());
    detail::parallel_for(active.size(), cfg.threads, [&](std::size_t i) {
      FeatureMask m = out.mask;
      m.selected[active[i]] = false;
      scores[i] = cross_validate(trainer, table, m, plan, cfg.metric).mean;
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    if (!(scores[best] > out.final_score + 1e-12)) break;
    out.mask.selected[active[best]] = false;
    out.final_score = scores[best];
    out.steps.push_back({active[best], scores[best]});
  }
  return out;
}

FeatureMask backward_elimination(const Trainer& trainer, const FeatureTable& table,
                                 const EliminationConfig& cfg) {
  return backward_elimination_trace(trainer, table, cfg).mask;
}

FeatureMask backward_elimination(const Trainer& trainer, const Dataset& d,
                                 const EliminationConfig& cfg, const FeatureOptions& features) {
  const FeatureContext ctx = fit_feature_context(d, features);
  return backward_elimination(trainer, featurize(d, ctx), cfg);
}

void SearchSpace::validate() const {
  if (params.empty()) throw Error(ErrorKind::kInvalidConfig, "search space is empty");
  for (const auto& p : params) {
    const bool ok = [&] {
      switch (p.kind) {
        case ParamRange::Kind::kLogUniform: return p.lo > 0.0 && p.lo <= p.hi;
        case ParamRange::Kind::kUniform: return p.lo <= p.hi;
        case ParamRange::Kind::kInt:
          return p.lo <= p.hi && std::floor(p.lo) == p.lo && std::floor(p.hi) == p.hi;
        case ParamRange::Kind::kCategorical: return !p.choices.empty();
      }
      return false;
    }();
    if (!ok || !std::isfinite(p.lo) || !std::isfinite(p.hi)) {
      throw Error(ErrorKind::kInvalidConfig, "invalid range for parameter " + p.name,
                  {{"parameter", p.name}});
    }
  }
}

bool SearchSpace::is_grid() const {
  return std::all_of(params.begin(), params.end(), [](const ParamRange& p) {
    return p.kind == ParamRange::Kind::kCategorical;
  });
}

std::size_t SearchSpace::grid_size() const {
  std::size_t n = 1;
  for (const auto& p : params) n *= p.choices.size();
  return n;
}

nlohmann::json SearchSpace::grid_point(std::size_t index) const {
  nlohmann::json out = nlohmann::json::object();
  for (auto it = params.rbegin(); it != params.rend(); ++it) {
    out[it->name] = it->choices[index % it->choices.size()];
    index /= it->choices.size();
  }
  return out;
}

nlohmann::json SearchSpace::sample(Rng& rng) const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& p : params) {
    switch (p.kind) {
      case ParamRange::Kind::kLogUniform:
        out[p.name] = std::exp(rng.uniform(std::log(p.lo), std::log(p.hi)));
        break;
      case ParamRange::Kind::kUniform:
        out[p.name] = rng.uniform(p.lo, p.hi);
        break;
      case ParamRange::Kind::kInt:
        out[p.name] = static_cast<std::int64_t>(p.lo) +
                      static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(p.hi - p.lo) + 1));
        break;
      case ParamRange::Kind::kCategorical:
        out[p.name] = p.choices[rng.index(p.choices.size())];
        break;
    }
  }
  return out;
}

SearchSpace SearchSpace::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kInvalidConfig, "search space must be an object");
  SearchSpace s;
  for (const auto& [name, spec] : j.items()) {
    if (!spec.is_object() || spec.size() != 1) {
      throw Error(ErrorKind::kInvalidConfig, "parameter " + name + " needs exactly one range",
                  {{"parameter", name}});
    }
    const auto& [key, value] = *spec.items().begin();
    try {
      if (key == "choice") {
        s.params.push_back(choice(name, value.get<std::vector<nlohmann::json>>()));
      } else {
        const auto bounds = value.get<std::vector<double>>();
        if (bounds.size() != 2) throw Error(ErrorKind::kInvalidConfig, "range needs [lo, hi]");
        ParamRange::Kind kind;
        if (key == "log_uniform") kind = ParamRange::Kind::kLogUniform;
        else if (key == "uniform") kind = ParamRange::Kind::kUniform;
        else if (key == "int") kind = ParamRange::Kind::kInt;
        else throw Error(ErrorKind::kInvalidConfig, "unknown range kind " + key);
        s.params.push_back(range(name, kind, bounds[0], bounds[1]));
      }
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::kInvalidConfig, "malformed range for parameter " + name,
                  {{"parameter", name}});
    }
  }
  s.validate();
  return s;
}

nlohmann::json SearchSpace::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& p : params) {
    if (p.kind == ParamRange::Kind::kCategorical) {
      j[p.name] = {{kind_key(p.kind), p.choices}};
    } else {
      j[p.name] = {{kind_key(p.kind), {p.lo, p.hi}}};
    }
  }
  return j;
}

SearchSpace default_search_space(const std::string& model) {
  using K = ParamRange::Kind;
  SearchSpace s;
  if (model == "sgdr") {
    s.params = {range("lr", K::kLogUniform, 1e-3, 0.1), range("l2", K::kLogUniform, 1e-6, 1e-2),
                range("epochs", K::kInt, 50, 200)};
  } else if (model == "bayridge") {
    s.params = {range("tol", K::kLogUniform, 1e-5, 1e-2), choice("max_iter", {100, 300})};
  } else if (model == "xtrees") {
    s.params = {range("n_trees", K::kInt, 20, 100), range("k_features", K::kInt, 2, 10),
                range("min_samples_leaf", K::kInt, 1, 8)};
  } else if (model == "listnet") {
    s.params = {range("lr", K::kLogUniform, 0.01, 0.5), range("temperature", K::kLogUniform, 0.5, 4)};
  } else if (model == "ranksvm") {
    s.params = {range("c", K::kLogUniform, 1, 1000), range("lr", K::kLogUniform, 1e-3, 0.1)};
  } else if (model == "listmle") {
    s.params = {range("lr", K::kLogUniform, 0.005, 0.2)};
  } else if (model == "adarank") {
    s.params = {range("rounds", K::kInt, 5, 100)};
  } else if (model == "ranknet" || model == "lambdarank") {
    s.params = {choice("hidden", {5, 10, 20}), range("lr", K::kLogUniform, 0.005, 0.2)};
  } else {
    throw Error(ErrorKind::kInvalidConfig, "unknown model " + model, {{"model", model}});
  }
  return s;
}

SearchResult randomized_search(const Trainer& trainer, const SearchSpace& space,
                               const FeatureTable& table, const SearchConfig& cfg) {
  if (cfg.samples < 1) {
    throw Error(ErrorKind::kInvalidConfig, "randomized search needs samples >= 1",
                {{"samples", cfg.samples}});
  }
  space.validate();
  SearchResult out;
  Rng rng(derive_seed(cfg.seed, "candidates"));
  const auto samples = static_cast<std::size_t>(cfg.samples);
  if (space.is_grid()) {
    std::vector<std::size_t> order(space.grid_size());
    std::iota(order.begin(), order.end(), 0);
    if (samples < order.size()) {
      rng.shuffle(order);
      order.resize(samples);
    }
    for (std::size_t i : order) out.candidates.push_back(space.grid_point(i));
  } else {
    for (std::size_t i = 0; i < samples; ++i) out.candidates.push_back(space.sample(rng));
  }

  const FoldPlan plan = split_user_folds(table.users(), cfg.folds, derive_seed(cfg.seed, "folds"));
  out.candidate_scores.assign(out.candidates.size(), 0.0);
  detail::parallel_for(out.candidates.size(), cfg.threads, [&](std::size_t i) {
    Trainer t = trainer;
    t.params = overlay(trainer.params, out.candidates[i]);
    out.candidate_scores[i] = cross_validate(t, table, cfg.mask, plan, cfg.metric).mean;
  });
  for (std::size_t i = 1; i < out.candidate_scores.size(); ++i) {
    if (out.candidate_scores[i] > out.candidate_scores[out.best_index]) out.best_index = i;
  }
  out.cv_score = out.candidate_scores[out.best_index];
  out.best_params = overlay(trainer.params, out.candidates[out.best_index]);
  return out;
}

Significance compare_fold_scores(const std::string& a_name, std::span<const double> a,
                                 const std::string& b_name, std::span<const double> b,
                                 double alpha) {
  Significance s;
  s.a = a_name;
  s.b = b_name;
  s.alpha = alpha;
  try {
    s.test = paired_t_test(a, b);
    s.significant = s.test->p_value < alpha;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDegenerateDifferences) throw;
  }
  return s;
}

nlohmann::json significance_to_json(const Significance& s) {
  nlohmann::json j = {{"a", s.a}, {"b", s.b}, {"alpha", s.alpha}, {"significant", s.significant}};
  if (s.test) {
    j["t_statistic"] = s.test->t_statistic;
    j["p_value"] = s.test->p_value;
    j["df"] = s.test->df;
    j["mean_difference"] = s.test->mean_difference;
  } else {
    j["t_statistic"] = nullptr;
    j["p_value"] = nullptr;
    j["degenerate"] = true;
  }
  return j;
}

std::vector<double> fold_means(const MetricReport& report, const FoldPlan& plan) {
  std::vector<double> out;
  for (int f = 0; f < plan.k; ++f) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& u : plan.fold_users(f)) {
      auto it = report.per_user.find(u);
      if (it == report.per_user.end()) continue;
      sum += it->second;
      ++n;
    }
    if (n == 0) {
      throw Error(ErrorKind::kTooFewUsers, "a fold has no evaluated users", {{"fold", f}});
    }
    out.push_back(sum / static_cast<double>(n));
  }
  return out;
}

}  // namespace engrank
