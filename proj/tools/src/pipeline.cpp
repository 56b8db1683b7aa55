#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "engrank/error.hpp"
#include "engrank/models.hpp"
#include "io.hpp"

namespace engrank::cli {
namespace {

[[noreturn]] void config_error(const std::string& message, nlohmann::json details = {}) {
  throw Error(ErrorKind::kInvalidConfig, message,
              details.is_null() ? nlohmann::json::object() : std::move(details));
}

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object", {{"section", where}});
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) config_error("unknown key " + key + " in " + where,
                                          {{"section", where}, {"key", key}});
  }
}

template <typename T>
T field(const nlohmann::json& obj, const std::string& key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(where + "." + key + " has the wrong type", {{"section", where}, {"key", key}});
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

nlohmann::json mask_indices(const FeatureMask& m) { return m.indices(); }

nlohmann::json mask_names(const FeatureMask& m) {
  nlohmann::json names = nlohmann::json::array();
  for (std::size_t i : m.indices()) names.push_back(feature_name(i));
  return names;
}

// User-level train/test split.
std::pair<std::set<std::string>, std::set<std::string>> split_users(
    std::vector<std::string> users, double test_fraction, Seed seed) {
  std::sort(users.begin(), users.end());
  Rng rng(seed);
  rng.shuffle(users);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * users.size()));
  if (n_test < 1 || n_test >= users.size()) {
    throw Error(ErrorKind::kTooFewUsers, "test split leaves an empty side",
                {{"users", users.size()}, {"test_fraction", test_fraction}});
  }
  std::set<std::string> test(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::set<std::string> train(users.begin() + static_cast<std::ptrdiff_t>(n_test), users.end());
  return {train, test};
}

struct Variant {
  FeatureMask mask;
  TrainedModel model;
  RankingSet test_rankings;
  MetricReport report;
  std::vector<double> fold_scores;
  nlohmann::json selection;  // null without selection
};

struct ModelRun {
  std::string name;
  Trainer trainer;
  nlohmann::json tuning;  // null without search
  Variant without_fs;
  Variant with_fs;
};

nlohmann::json variant_json(const Variant& v) {
  return {{"ndcg", v.report.mean},
          {"fold_scores", v.fold_scores},
          {"mask", mask_indices(v.mask)},
          {"features", mask_names(v.mask)},
          {"selection", v.selection}};
}

std::string fixed(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json data;
  if (synthetic) {
    data["synthetic"] = {{"users", synthetic->users},
                         {"tweets_per_user", synthetic->tweets_per_user},
                         {"movies", synthetic->movies},
                         {"noise", synthetic->noise},
                         {"utility", synthetic->utility == PlantedUtility::kLinear ? "linear"
                                                                                    : "quadratic"}};
  } else {
    data["interactions"] = interactions.generic_string();
    data["profiles"] = profiles.generic_string();
  }
  nlohmann::json models_j = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json e = {{"name", m.name}, {"params", m.params}};
    if (m.space) e["search"] = {{"samples", m.search_samples}, {"space", m.space->to_json()}};
    models_j.push_back(e);
  }
  return {
      {"seed", seed},
      {"data", data},
      {"features",
       {{"holidays", features.holidays.dates},
        {"reference_time", features.reference_time ? nlohmann::json(format_iso8601(*features.reference_time))
                                                   : nlohmann::json(nullptr)},
        {"mask", mask_indices(mask)}}},
      {"split", {{"test_fraction", test_fraction}}},
      {"models", models_j},
      {"feature_selection",
       {{"enabled", feature_selection}, {"folds", selection_folds}, {"max_removals", max_removals}}},
      {"tuning", {{"folds", tuning_folds}}},
      {"aggregation",
       {{"objective", objective_name(aggregation.objective)},
        {"exact_threshold", aggregation.exact_threshold},
        {"weight_samples", weight_samples},
        {"weight_folds", weight_folds},
        {"oof_folds", oof_folds}}},
      {"evaluation",
       {{"k", metric.k},
        {"gain", gain_mode_name(metric.gain)},
        {"zero_idcg", zero_idcg_name(metric.zero_idcg)},
        {"folds", eval_folds}}},
  };
}

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  check_keys(j, {"seed", "output_dir", "data", "features", "split", "models", "feature_selection",
                 "tuning", "aggregation", "evaluation", "threads"},
             "config");
  RunConfig cfg;
  if (!j.contains("seed") || !j.at("seed").is_number_unsigned()) {
    config_error("config.seed is mandatory and must be a nonnegative integer");
  }
  cfg.seed = j.at("seed").get<Seed>();
  if (j.contains("output_dir")) {
    cfg.output_dir = resolve(base_dir, field<std::string>(j, "output_dir", "", "config"));
  }
  cfg.threads = field<int>(j, "threads", 0, "config");

  if (!j.contains("data")) config_error("config.data is required");
  const auto& data = j.at("data");
  check_keys(data, {"synthetic", "interactions", "profiles"}, "data");
  if (data.contains("synthetic")) {
    const auto& s = data.at("synthetic");
    check_keys(s, {"users", "tweets_per_user", "movies", "noise", "utility"}, "data.synthetic");
    SynthConfig sc;
    sc.users = field<int>(s, "users", sc.users, "data.synthetic");
    sc.tweets_per_user = field<int>(s, "tweets_per_user", sc.tweets_per_user, "data.synthetic");
    sc.movies = field<int>(s, "movies", sc.movies, "data.synthetic");
    sc.noise = field<double>(s, "noise", sc.noise, "data.synthetic");
    const auto utility = field<std::string>(s, "utility", "linear", "data.synthetic");
    if (utility == "linear") sc.utility = PlantedUtility::kLinear;
    else if (utility == "quadratic") sc.utility = PlantedUtility::kQuadratic;
    else config_error("data.synthetic.utility must be linear or quadratic");
    cfg.synthetic = sc;
  } else {
    if (!data.contains("interactions") || !data.contains("profiles")) {
      config_error("data needs either synthetic or both interactions and profiles");
    }
    cfg.interactions = resolve(base_dir, field<std::string>(data, "interactions", "", "data"));
    cfg.profiles = resolve(base_dir, field<std::string>(data, "profiles", "", "data"));
    for (const auto& p : {cfg.interactions, cfg.profiles}) {
      if (!std::filesystem::exists(p)) {
        throw Error(ErrorKind::kIo, "input file not found: " + p.string(), {{"path", p.string()}});
      }
    }
  }

  if (j.contains("features")) {
    const auto& f = j.at("features");
    check_keys(f, {"holidays", "reference_time", "mask"}, "features");
    for (const auto& d : field<std::vector<std::string>>(f, "holidays", {}, "features")) {
      if (d.size() != 10 || !parse_iso8601(d)) config_error("holiday dates must be YYYY-MM-DD", {{"date", d}});
      cfg.features.holidays.dates.insert(d);
    }
    if (f.contains("reference_time") && !f.at("reference_time").is_null()) {
      const auto t = parse_iso8601(field<std::string>(f, "reference_time", "", "features"));
      if (!t) config_error("features.reference_time is not ISO-8601");
      cfg.features.reference_time = *t;
    }
    if (f.contains("mask")) {
      try {
        cfg.mask = mask_from_json(f.at("mask"));
      } catch (const nlohmann::json::exception&) {
        config_error("features.mask must be a preset name or an index list");
      }
    }
  }

  if (j.contains("split")) {
    check_keys(j.at("split"), {"test_fraction"}, "split");
    cfg.test_fraction = field<double>(j.at("split"), "test_fraction", 0.2, "split");
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
      config_error("split.test_fraction must lie in (0, 1)");
    }
  }

  if (j.contains("models")) {
    if (!j.at("models").is_array() || j.at("models").empty()) {
      config_error("models must be a non-empty array");
    }
    std::set<std::string> seen;
    for (const auto& m : j.at("models")) {
      ModelSpec spec;
      if (m.is_string()) {
        spec.name = m.get<std::string>();
      } else {
        check_keys(m, {"name", "params", "search"}, "models[]");
        spec.name = field<std::string>(m, "name", "", "models[]");
        spec.params = field<nlohmann::json>(m, "params", nlohmann::json::object(), "models[]");
        if (m.contains("search")) {
          const auto& s = m.at("search");
          check_keys(s, {"samples", "space"}, "models[].search");
          spec.search_samples = field<int>(s, "samples", 10, "models[].search");
          const auto space = field<nlohmann::json>(s, "space", "default", "models[].search");
          spec.space = space.is_string() && space.get<std::string>() == "default"
                           ? default_search_space(spec.name)
                           : SearchSpace::from_json(space);
        }
      }
      if (!is_known_model(spec.name)) config_error("unknown model " + spec.name, {{"model", spec.name}});
      if (!seen.insert(spec.name).second) config_error("model listed twice: " + spec.name);
      // Reject bad keys now rather than deep inside a stage.
      for (const auto& [key, value] : spec.params.items()) {
        if (!default_params(spec.name).contains(key)) {
          config_error(spec.name + ": parameter " + key + " is not recognised",
                       {{"model", spec.name}, {"parameter", key}});
        }
      }
      cfg.models.push_back(std::move(spec));
    }
  } else {
    for (const auto& name : model_names()) {
      ModelSpec spec;
      spec.name = name;
      cfg.models.push_back(std::move(spec));
    }
  }

  if (j.contains("feature_selection")) {
    const auto& f = j.at("feature_selection");
    check_keys(f, {"enabled", "folds", "max_removals"}, "feature_selection");
    cfg.feature_selection = field<bool>(f, "enabled", true, "feature_selection");
    cfg.selection_folds = field<int>(f, "folds", 5, "feature_selection");
    cfg.max_removals = field<int>(f, "max_removals", -1, "feature_selection");
  }
  if (j.contains("tuning")) {
    check_keys(j.at("tuning"), {"folds"}, "tuning");
    cfg.tuning_folds = field<int>(j.at("tuning"), "folds", 5, "tuning");
  }
  if (j.contains("aggregation")) {
    const auto& a = j.at("aggregation");
    check_keys(a, {"objective", "exact_threshold", "weight_samples", "weight_folds", "oof_folds"},
               "aggregation");
    cfg.aggregation.objective =
        parse_objective(field<std::string>(a, "objective", "minimize-disagreement", "aggregation"));
    cfg.aggregation.exact_threshold =
        field<std::size_t>(a, "exact_threshold", cfg.aggregation.exact_threshold, "aggregation");
    if (cfg.aggregation.exact_threshold > 16) config_error("aggregation.exact_threshold must be <= 16");
    cfg.weight_samples = field<int>(a, "weight_samples", 200, "aggregation");
    cfg.weight_folds = field<int>(a, "weight_folds", 5, "aggregation");
    cfg.oof_folds = field<int>(a, "oof_folds", 5, "aggregation");
  }
  if (j.contains("evaluation")) {
    const auto& e = j.at("evaluation");
    check_keys(e, {"k", "gain", "zero_idcg", "folds"}, "evaluation");
    cfg.metric.k = field<int>(e, "k", 10, "evaluation");
    cfg.metric.gain = parse_gain_mode(field<std::string>(e, "gain", "linear", "evaluation"));
    cfg.metric.zero_idcg = parse_zero_idcg(field<std::string>(e, "zero_idcg", "one", "evaluation"));
    cfg.eval_folds = field<int>(e, "folds", 10, "evaluation");
  }
  if (cfg.metric.k < 1) config_error("evaluation.k must be positive");
  for (int folds : {cfg.selection_folds, cfg.tuning_folds, cfg.weight_folds, cfg.oof_folds,
                    cfg.eval_folds}) {
    if (folds < 2) config_error("fold counts must be at least 2", {{"folds", folds}});
  }
  if (cfg.weight_samples < 0) config_error("aggregation.weight_samples must be >= 0");
  return cfg;
}

nlohmann::json run_pipeline(const RunConfig& cfg, const std::filesystem::path& out) {
  ensure_dir(out);
  ensure_dir(out / "models");
  ensure_dir(out / "rankings");

  const Dataset dataset =
      cfg.synthetic
          ? generate_synthetic(*cfg.synthetic, derive_seed(cfg.seed, "synth")).dataset
          : load_interactions(cfg.interactions, cfg.profiles,
                              LoadOptions{.reference_time = cfg.features.reference_time});
  const auto [train_users, test_users] =
      split_users(dataset.user_ids(), cfg.test_fraction, derive_seed(cfg.seed, "split"));
  const Dataset train = dataset.subset(train_users);
  const Dataset test = dataset.subset(test_users);

  FeatureContext ctx = fit_feature_context(train, cfg.features);
  ctx.mask = cfg.mask;
  const FeatureTable train_table = featurize(train, ctx);
  const FeatureTable test_table = featurize(test, ctx);
  write_json_file(out / "features.json", feature_context_to_json(ctx));

  const auto test_labels = test_table.label_map();
  const auto train_labels = train_table.label_map();
  const FoldPlan eval_plan = split_user_folds(test_table.users(), cfg.eval_folds,
                                              derive_seed(cfg.seed, "eval-folds"));

  auto evaluate = [&](Variant& v) {
    v.test_rankings = v.model.rank(test_table);
    v.report = mean_ndcg(v.test_rankings, test_labels, cfg.metric);
    v.fold_scores = fold_means(v.report, eval_plan);
  };
  auto save = [&](const std::string& stem, const Variant& v) {
    save_model(out / "models" / (stem + ".json"), v.model);
    std::ostringstream s;
    write_rankings(s, v.test_rankings);
    write_text_file(out / "rankings" / (stem + ".jsonl"), s.str());
  };

  std::vector<ModelRun> runs;
  for (const auto& spec : cfg.models) {
    ModelRun run;
    run.name = spec.name;
    run.trainer.name = spec.name;
    run.trainer.params = spec.params;
    run.trainer.options.seed = derive_seed(cfg.seed, "train:" + spec.name);
    run.trainer.options.metric = cfg.metric;

    if (spec.space) {
      SearchConfig sc;
      sc.samples = spec.search_samples;
      sc.folds = cfg.tuning_folds;
      sc.seed = derive_seed(cfg.seed, "tune:" + spec.name);
      sc.metric = cfg.metric;
      sc.mask = cfg.mask;
      sc.threads = cfg.threads;
      const SearchResult r = randomized_search(run.trainer, *spec.space, train_table, sc);
      run.trainer.params = r.best_params;
      run.tuning = {{"best_params", r.best_params},
                    {"cv_score", r.cv_score},
                    {"best_index", r.best_index},
                    {"candidates", r.candidates},
                    {"candidate_scores", r.candidate_scores}};
    }

    run.without_fs.mask = cfg.mask;
    run.without_fs.model = train_model(spec.name, run.trainer.params, train_table, cfg.mask,
                                       run.trainer.options);
    evaluate(run.without_fs);
    save(spec.name + "_without_fs", run.without_fs);

    if (cfg.feature_selection) {
      EliminationConfig ec;
      ec.folds = cfg.selection_folds;
      ec.seed = derive_seed(cfg.seed, "selection");
      ec.max_removals = cfg.max_removals;
      ec.metric = cfg.metric;
      ec.start = cfg.mask;
      ec.threads = cfg.threads;
      const EliminationResult er = backward_elimination_trace(run.trainer, train_table, ec);
      nlohmann::json steps = nlohmann::json::array();
      for (const auto& s : er.steps) {
        steps.push_back({{"removed", feature_name(s.removed)}, {"index", s.removed}, {"cv_score", s.score}});
      }
      run.with_fs.mask = er.mask;
      run.with_fs.selection = {{"cv_baseline", er.baseline_score},
                               {"cv_final", er.final_score},
                               {"steps", steps}};
      run.with_fs.model = train_model(spec.name, run.trainer.params, train_table, er.mask,
                                      run.trainer.options);
      evaluate(run.with_fs);
    } else {
      run.with_fs = run.without_fs;
    }
    save(spec.name + "_with_fs", run.with_fs);
    runs.push_back(std::move(run));
  }

  // Aggregation over the feature-selected variants. Weights are learned on
  // out-of-fold rankings of the training users.
  const FoldPlan oof_plan = split_user_folds(train_table.users(), cfg.oof_folds,
                                             derive_seed(cfg.seed, "oof"));
  std::map<std::string, RankingSet> oof;
  auto oof_of = [&](const ModelRun& run) -> const RankingSet& {
    auto it = oof.find(run.name);
    if (it == oof.end()) {
      it = oof.emplace(run.name, cross_validate(run.trainer, train_table, run.with_fs.mask,
                                                oof_plan, cfg.metric).out_of_fold).first;
    }
    return it->second;
  };

  struct AggregateRun {
    std::string name;
    std::vector<const ModelRun*> members;
    WeightSearchResult weights;
    MetricReport report;
    MetricReport borda_report;
    std::vector<double> fold_scores;
  };
  std::vector<AggregateRun> aggregates;
  const std::vector<std::pair<std::string, std::vector<ModelFamily>>> groups = {
      {"LTRs", {ModelFamily::kRanker}},
      {"REGs", {ModelFamily::kRegressor}},
      {"LTRs+REGs", {ModelFamily::kRanker, ModelFamily::kRegressor}}};
  for (const auto& [group_name, families] : groups) {
    AggregateRun agg;
    agg.name = group_name;
    for (const auto& run : runs) {
      if (std::find(families.begin(), families.end(), model_family(run.name)) != families.end()) {
        agg.members.push_back(&run);
      }
    }
    if (agg.members.empty()) continue;
    if (agg.members.size() == 1) {
      agg.weights.weights = {1.0};
    } else {
      std::vector<RankingSet> outputs;
      for (const auto* m : agg.members) outputs.push_back(oof_of(*m));
      WeightSearchConfig wc;
      wc.samples = cfg.weight_samples;
      wc.folds = cfg.weight_folds;
      wc.seed = derive_seed(cfg.seed, "weights:" + group_name);
      wc.metric = cfg.metric;
      wc.aggregation = cfg.aggregation;
      wc.threads = cfg.threads;
      agg.weights = learn_weights(outputs, train_labels, wc);
    }
    WeightedRankerSet set;
    for (const auto* m : agg.members) {
      set.names.push_back(m->name);
      set.outputs.push_back(m->with_fs.test_rankings);
    }
    set.weights = agg.weights.weights;
    const RankingSet consensus = aggregate_all(set, cfg.aggregation);
    agg.report = mean_ndcg(consensus, test_labels, cfg.metric);
    agg.borda_report = mean_ndcg(borda_all(set), test_labels, cfg.metric);
    agg.fold_scores = fold_means(agg.report, eval_plan);
    std::ostringstream s;
    write_rankings(s, consensus, false);
    write_text_file(out / "rankings" / ("aggregate_" + group_name + ".jsonl"), s.str());
    aggregates.push_back(std::move(agg));
  }

  std::vector<Significance> tests;
  for (const auto& run : runs) {
    tests.push_back(compare_fold_scores(run.name + " with FS", run.with_fs.fold_scores,
                                        run.name + " without FS", run.without_fs.fold_scores));
  }
  for (const auto& agg : aggregates) {
    const ModelRun* best = agg.members.front();
    for (const auto* m : agg.members) {
      if (m->with_fs.report.mean > best->with_fs.report.mean) best = m;
    }
    tests.push_back(compare_fold_scores(agg.name, agg.fold_scores, best->name + " with FS",
                                        best->with_fs.fold_scores));
  }
  auto find_agg = [&](const std::string& n) -> const AggregateRun* {
    for (const auto& a : aggregates) {
      if (a.name == n) return &a;
    }
    return nullptr;
  };
  for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
           {"LTRs+REGs", "LTRs"}, {"LTRs+REGs", "REGs"}, {"LTRs", "REGs"}}) {
    if (const auto *x = find_agg(a), *y = find_agg(b); x && y) {
      tests.push_back(compare_fold_scores(a, x->fold_scores, b, y->fold_scores));
    }
  }

  nlohmann::json models_j = nlohmann::json::array();
  for (const auto& run : runs) {
    models_j.push_back({{"name", run.name},
                        {"family", model_family(run.name) == ModelFamily::kRegressor ? "regression"
                                                                                      : "ltr"},
                        {"params", run.trainer.params},
                        {"tuning", run.tuning},
                        {"without_fs", variant_json(run.without_fs)},
                        {"with_fs", variant_json(run.with_fs)}});
  }
  nlohmann::json aggregates_j = nlohmann::json::array();
  for (const auto& agg : aggregates) {
    nlohmann::json w = nlohmann::json::object();
    for (std::size_t i = 0; i < agg.members.size(); ++i) w[agg.members[i]->name] = agg.weights.weights[i];
    aggregates_j.push_back({{"name", agg.name},
                            {"members", w.size()},
                            {"weights", w},
                            {"weight_cv_score", agg.members.size() > 1 ? nlohmann::json(agg.weights.cv_score)
                                                                       : nlohmann::json(nullptr)},
                            {"ndcg", agg.report.mean},
                            {"borda_ndcg", agg.borda_report.mean},
                            {"fold_scores", agg.fold_scores}});
  }
  nlohmann::json tests_j = nlohmann::json::array();
  for (const auto& t : tests) tests_j.push_back(significance_to_json(t));

  const nlohmann::json report = {
      {"report_version", 1},
      {"config", cfg.to_json()},
      {"data",
       {{"train_users", train_users.size()},
        {"test_users", test_users.size()},
        {"train_rows", train_table.rows()},
        {"test_rows", test_table.rows()}}},
      {"metric",
       {{"k", cfg.metric.k},
        {"gain", gain_mode_name(cfg.metric.gain)},
        {"zero_idcg", zero_idcg_name(cfg.metric.zero_idcg)}}},
      {"models", models_j},
      {"aggregates", aggregates_j},
      {"significance", tests_j}};
  write_json_file(out / "report.json", report);
  write_text_file(out / "report.txt", format_report(report));
  return report;
}

std::string format_report(const nlohmann::json& report) {
  std::ostringstream s;
  const int k = report.at("metric").at("k").get<int>();
  auto section = [&](const std::string& title, const std::string& family) {
    s << title << " (NDCG@" << k << ")\n";
    s << pad("model", 14) << pad("without FS", 16) << "with FS\n";
    for (const auto& m : report.at("models")) {
      if (m.at("family") != family) continue;
      s << pad(m.at("name").get<std::string>(), 14)
        << pad(fixed(m.at("without_fs").at("ndcg").get<double>()), 16)
        << fixed(m.at("with_fs").at("ndcg").get<double>()) << '\n';
    }
    s << '\n';
  };
  section("Regression results", "regression");
  section("Learning to rank results", "ltr");

  s << "Ranking aggregation results (NDCG@" << k << ")\n";
  s << pad("aggregate", 14) << pad("kemeny", 16) << "borda\n";
  for (const auto& a : report.at("aggregates")) {
    s << pad(a.at("name").get<std::string>(), 14) << pad(fixed(a.at("ndcg").get<double>()), 16)
      << fixed(a.at("borda_ndcg").get<double>()) << '\n';
  }
  s << '\n';

  s << "Paired t-tests over test folds\n";
  for (const auto& t : report.at("significance")) {
    s << t.at("a").get<std::string>() << " vs " << t.at("b").get<std::string>() << ": ";
    if (t.at("p_value").is_null()) {
      s << "identical fold scores\n";
    } else {
      s << "t = " << fixed(t.at("t_statistic").get<double>(), 4)
        << ", p = " << fixed(t.at("p_value").get<double>(), 6)
        << (t.at("significant").get<bool>() ? " (significant)" : "") << '\n';
    }
  }
  return s.str();
}

}  // namespace engrank::cli
