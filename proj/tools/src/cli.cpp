#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>

#include "engrank/aggregation.hpp"
#include "engrank/dataset.hpp"
#include "engrank/error.hpp"
#include "engrank/evaluation.hpp"
#include "engrank/feature_table.hpp"
#include "engrank/metrics.hpp"
#include "engrank/models.hpp"
#include "io.hpp"
#include "pipeline.hpp"

namespace engrank::cli {
namespace {

namespace fs = std::filesystem;

struct Command {
  std::string summary;
  std::function<void(CLI::App&)> setup;  // declares options
  std::function<void()> run;
};

std::string rankings_text(const RankingSet& r, bool with_scores = true) {
  std::ostringstream s;
  write_rankings(s, r, with_scores);
  return s.str();
}

NdcgOptions metric_options(int k, const std::string& gain, const std::string& zero) {
  NdcgOptions m;
  m.k = k;
  m.gain = parse_gain_mode(gain);
  m.zero_idcg = parse_zero_idcg(zero);
  if (m.k < 1) throw Error(ErrorKind::kInvalidConfig, "k must be positive", {{"k", k}});
  return m;
}

void require_model(const std::string& name) {
  if (!is_known_model(name)) {
    throw Error(ErrorKind::kInvalidConfig, "unknown model " + name, {{"model", name}});
  }
}

// ---- individual subcommands; each binds flags into its own state ----

struct GenSynth {
  SynthConfig cfg;
  std::string utility = "linear";
  std::string format = "csv";
  Seed seed = 0;
  std::string out;

  void setup(CLI::App& app) {
    app.add_option("--users", cfg.users, "number of users")->capture_default_str();
    app.add_option("--tweets-per-user", cfg.tweets_per_user, "tweets per user")->capture_default_str();
    app.add_option("--movies", cfg.movies, "catalogue size")->capture_default_str();
    app.add_option("--noise", cfg.noise, "Poisson noise rate on labels")->capture_default_str();
    app.add_option("--utility", utility, "linear or quadratic")->capture_default_str();
    app.add_option("--format", format, "csv or jsonl")->capture_default_str();
    app.add_option("--seed", seed, "root seed")->required();
    app.add_option("--out", out, "output directory")->required();
  }

  void run() {
    if (utility == "linear") cfg.utility = PlantedUtility::kLinear;
    else if (utility == "quadratic") cfg.utility = PlantedUtility::kQuadratic;
    else throw Error(ErrorKind::kInvalidConfig, "utility must be linear or quadratic");
    DataFormat f;
    if (format == "csv") f = DataFormat::kCsv;
    else if (format == "jsonl") f = DataFormat::kJsonl;
    else throw Error(ErrorKind::kInvalidConfig, "format must be csv or jsonl");
    const std::string ext = format == "csv" ? ".csv" : ".jsonl";

    const Seed s = derive_seed(seed, "synth");
    const SynthResult r = generate_synthetic(cfg, s);
    ensure_dir(out);
    {
      std::ostringstream a, b;
      write_interactions(a, r.dataset.interactions, f);
      write_profiles(b, r.dataset.profiles, f);
      write_text_file(fs::path(out) / ("interactions" + ext), a.str());
      write_text_file(fs::path(out) / ("profiles" + ext), b.str());
    }
    write_json_file(fs::path(out) / "planted.json",
                    {{"bias", r.planted.bias},
                     {"linear", r.planted.linear},
                     {"quadratic", r.planted.quadratic},
                     {"center", r.planted.center},
                     {"noise", r.planted.noise},
                     {"reference_time", format_iso8601(r.dataset.reference_time)}});
    const nlohmann::json config = {{"users", cfg.users},
                                   {"tweets_per_user", cfg.tweets_per_user},
                                   {"movies", cfg.movies},
                                   {"noise", cfg.noise},
                                   {"utility", utility},
                                   {"format", format}};
    write_manifest(out, "gen-synth", config, {{"root", seed}, {"synth", s}},
                   {"interactions" + ext, "profiles" + ext, "planted.json"});
  }
};

struct Featurize {
  std::string interactions, profiles, ref_time, holidays, mask = "all", fit_from, out;

  void setup(CLI::App& app) {
    app.add_option("--interactions", interactions, "interactions CSV/JSONL")->required();
    app.add_option("--profiles", profiles, "profiles CSV/JSONL")->required();
    app.add_option("--ref-time", ref_time, "reference time (ISO-8601); default latest tweet");
    app.add_option("--holidays", holidays, "comma-separated YYYY-MM-DD dates; default weekends");
    app.add_option("--mask", mask, "mask preset, file or indices recorded in the sidecar")
        ->capture_default_str();
    app.add_option("--fit-from", fit_from, "sidecar whose statistics should be reused");
    app.add_option("--out", out, "output directory")->required();
  }

  void run() {
    LoadOptions lo;
    FeatureOptions fo;
    if (!ref_time.empty()) {
      const auto t = parse_iso8601(ref_time);
      if (!t) throw Error(ErrorKind::kInvalidConfig, "--ref-time is not ISO-8601", {{"value", ref_time}});
      lo.reference_time = *t;
      fo.reference_time = *t;
    }
    for (const auto& d : split_list(holidays)) {
      if (d.size() != 10 || !parse_iso8601(d)) {
        throw Error(ErrorKind::kInvalidConfig, "holiday dates must be YYYY-MM-DD", {{"date", d}});
      }
      fo.holidays.dates.insert(d);
    }
    const Dataset d = load_interactions(interactions, profiles, lo);
    FeatureContext ctx;
    if (!fit_from.empty()) {
      ctx = feature_context_from_json(read_json_file(fit_from));
    } else {
      ctx = fit_feature_context(d, fo);
      ctx.mask = parse_mask(mask);
    }
    ensure_dir(out);
    std::ostringstream csv;
    write_feature_csv(csv, featurize(d, ctx));
    write_text_file(fs::path(out) / "features.csv", csv.str());
    write_json_file(fs::path(out) / "features.json", feature_context_to_json(ctx));
    write_manifest(out, "featurize",
                   {{"interactions", interactions}, {"profiles", profiles}, {"ref_time", ref_time},
                    {"holidays", holidays}, {"mask", mask}, {"fit_from", fit_from}},
                   nlohmann::json::object(), {"features.csv", "features.json"});
  }
};

struct ModelFlags {
  std::string model, params_path, mask = "all";
  Seed seed = 0;
  int k = 10;
  std::string gain = "linear", zero = "one";
  int threads = 1;

  void setup(CLI::App& app, bool need_seed = true) {
    app.add_option("--model", model, "model name")->required();
    app.add_option("--config", params_path, "JSON file with model parameters");
    app.add_option("--mask", mask, "mask preset, file or indices")->capture_default_str();
    auto* s = app.add_option("--seed", seed, "root seed");
    if (need_seed) s->required();
    app.add_option("--k", k, "NDCG cutoff")->capture_default_str();
    app.add_option("--gain", gain, "linear or exp")->capture_default_str();
    app.add_option("--zero-idcg", zero, "one or zero")->capture_default_str();
    app.add_option("--threads", threads, "worker threads (0: all cores)")->capture_default_str();
  }

  Trainer trainer() const {
    require_model(model);
    Trainer t;
    t.name = model;
    t.params = params_path.empty() ? nlohmann::json::object() : read_params(params_path);
    t.options.seed = derive_seed(seed, "train:" + model);
    t.options.metric = metric_options(k, gain, zero);
    t.options.threads = threads;
    return t;
  }

  nlohmann::json json() const {
    return {{"model", model}, {"config", params_path}, {"mask", mask}, {"k", k},
            {"gain", gain},   {"zero_idcg", zero}};
  }
};

struct SelectFeatures {
  ModelFlags m;
  std::string features, out;
  int folds = 5, max_removals = -1;

  void setup(CLI::App& app) {
    m.setup(app);
    app.add_option("--features", features, "feature CSV")->required();
    app.add_option("--folds", folds, "CV folds")->capture_default_str();
    app.add_option("--max-removals", max_removals, "removal budget (negative: unlimited)")
        ->capture_default_str();
    app.add_option("--out", out, "output directory")->required();
  }

  void run() {
    const Trainer t = m.trainer();
    EliminationConfig cfg;
    cfg.folds = folds;
    cfg.seed = derive_seed(m.seed, "selection");
    cfg.max_removals = max_removals;
    cfg.metric = t.options.metric;
    cfg.start = parse_mask(m.mask);
    cfg.threads = m.threads;
    const EliminationResult r = backward_elimination_trace(t, read_feature_csv(fs::path(features)), cfg);
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : r.steps) {
      steps.push_back({{"removed", feature_name(s.removed)}, {"index", s.removed}, {"cv_score", s.score}});
    }
    ensure_dir(out);
    write_json_file(fs::path(out) / "mask.json", {{"mask", mask_to_json(r.mask)},
                                                  {"cv_baseline", r.baseline_score},
                                                  {"cv_final", r.final_score},
                                                  {"steps", steps}});
    auto config = m.json();
    config["features"] = features;
    config["folds"] = folds;
    config["max_removals"] = max_removals;
    write_manifest(out, "select-features", config,
                   {{"root", m.seed}, {"train", t.options.seed}, {"selection", cfg.seed}},
                   {"mask.json"});
  }
};

struct Tune {
  ModelFlags m;
  std::string features, space_path, out;
  int samples = 20, folds = 5;

  void setup(CLI::App& app) {
    m.setup(app);
    app.add_option("--features", features, "feature CSV")->required();
    app.add_option("--space", space_path, "JSON search space; default per model");
    app.add_option("--samples", samples, "candidates")->capture_default_str();
    app.add_option("--folds", folds, "CV folds")->capture_default_str();
    app.add_option("--out", out, "output directory")->required();
  }

  void run() {
    const Trainer t = m.trainer();
    const SearchSpace space = space_path.empty() ? default_search_space(m.model)
                                                 : SearchSpace::from_json(read_json_file(space_path));
    SearchConfig cfg;
    cfg.samples = samples;
    cfg.folds = folds;
    cfg.seed = derive_seed(m.seed, "tune:" + m.model);
    cfg.metric = t.options.metric;
    cfg.mask = parse_mask(m.mask);
    cfg.threads = m.threads;
    const SearchResult r = randomized_search(t, space, read_feature_csv(fs::path(features)), cfg);
    nlohmann::json candidates = nlohmann::json::array();
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
      candidates.push_back({{"params", r.candidates[i]}, {"cv_score", r.candidate_scores[i]}});
    }
    ensure_dir(out);
    write_json_file(fs::path(out) / "best_params.json", {{"model", m.model},
                                                         {"params", r.best_params},
                                                         {"cv_score", r.cv_score},
                                                         {"best_index", r.best_index},
                                                         {"space", space.to_json()},
                                                         {"candidates", candidates}});
    auto config = m.json();
    config["features"] = features;
    config["space"] = space.to_json();
    config["samples"] = samples;
    config["folds"] = folds;
    write_manifest(out, "tune", config,
                   {{"root", m.seed}, {"train", t.options.seed}, {"tune", cfg.seed}},
                   {"best_params.json"});
  }
};

struct Train {
  ModelFlags m;
  std::string features, out;

  void setup(CLI::App& app) {
    m.setup(app);
    app.add_option("--features", features, "feature CSV")->required();
    app.add_option("--out", out, "output directory")->required();
  }

  void run() {
    const Trainer t = m.trainer();
    const TrainedModel model = train_model(t.name, t.params, read_feature_csv(fs::path(features)),
                                           parse_mask(m.mask), t.options);
    ensure_dir(out);
    save_model(fs::path(out) / "model.json", model);
    auto config = m.json();
    config["features"] = features;
    config["params"] = model.params;
    write_manifest(out, "train", config, {{"root", m.seed}, {"train", t.options.seed}},
                   {"model.json"});
  }
};

struct Rank {
  std::string model, features, out;

  void setup(CLI::App& app) {
    app.add_option("--model", model, "model.json from train")->required();
    app.add_option("--features", features, "feature CSV")->required();
    app.add_option("--out", out, "output directory")->required();
  }

  void run() {
    const TrainedModel m = load_model(model);
    const RankingSet r = m.rank(read_feature_csv(fs::path(features)));
    ensure_dir(out);
    write_text_file(fs::path(out) / "rankings.jsonl", rankings_text(r));
    write_manifest(out, "rank", {{"model", model}, {"features", features}},
                   nlohmann::json::object(), {"rankings.jsonl"});
  }
};

struct Aggregate {
  std::string rankings, weights, objective = "minimize-disagreement", method = "kemeny", out;
  std::size_t exact_threshold = 8;
  bool heuristic = false;

  void setup(CLI::App& app) {
    app.add_option("--rankings", rankings, "comma-separated ranking files")->required();
    app.add_option("--weights", weights, "JSON {\"weights\": {name: w}}; default uniform");
    app.add_option("--objective", objective, "minimize-disagreement or maximize-agreement")
        ->capture_default_str();
    app.add_option("--method", method, "kemeny or borda")->capture_default_str();
    app.add_option("--exact-threshold", exact_threshold, "largest list solved exactly")
        ->capture_default_str();
    app.add_flag("--heuristic", heuristic, "always use local search");
    app.add_option("--out", out, "output directory")->required();
  }

  void run() {
    WeightedRankerSet set;
    for (const auto& f : split_list(rankings)) {
      const std::string name = fs::path(f).stem().string();
      if (std::find(set.names.begin(), set.names.end(), name) != set.names.end()) {
        throw Error(ErrorKind::kInvalidConfig, "two ranking files share the name " + name,
                    {{"name", name}});
      }
      set.names.push_back(name);
      set.outputs.push_back(read_rankings(fs::path(f)));
    }
    if (set.outputs.empty()) throw Error(ErrorKind::kEmptyRankerSet, "no ranking files given");
    if (weights.empty()) {
      set.weights.assign(set.outputs.size(), 1.0);
    } else {
      const auto j = read_json_file(weights);
      if (!j.contains("weights") || !j.at("weights").is_object()) {
        throw Error(ErrorKind::kInvalidConfig, "weights file needs a \"weights\" object");
      }
      const auto& w = j.at("weights");
      for (const auto& name : set.names) {
        if (!w.contains(name) || !w.at(name).is_number()) {
          throw Error(ErrorKind::kInvalidConfig, "no weight for ranker " + name, {{"ranker", name}});
        }
        set.weights.push_back(w.at(name).get<double>());
      }
      for (const auto& [name, value] : w.items()) {
        if (std::find(set.names.begin(), set.names.end(), name) == set.names.end()) {
          throw Error(ErrorKind::kInvalidConfig, "weight given for unknown ranker " + name,
                      {{"ranker", name}});
        }
      }
    }
    AggregateOptions opts;
    opts.objective = parse_objective(objective);
    opts.exact_threshold = exact_threshold;
    opts.force_heuristic = heuristic;
    if (exact_threshold > 16) throw Error(ErrorKind::kInvalidConfig, "--exact-threshold must be <= 16");
    RankingSet result;
    if (method == "kemeny") result = aggregate_all(set, opts);
    else if (method == "borda") result = borda_all(set);
    else throw Error(ErrorKind::kInvalidConfig, "method must be kemeny or borda");
    ensure_dir(out);
    write_text_file(fs::path(out) / "rankings.jsonl", rankings_text(result, method == "borda"));
    nlohmann::json w = nlohmann::json::object();
    for (std::size_t i = 0; i < set.names.size(); ++i) w[set.names[i]] = set.weights[i];
    write_manifest(out, "aggregate",
                   {{"rankings", split_list(rankings)}, {"weights", w}, {"objective", objective},
                    {"method", method}, {"exact_threshold", exact_threshold}, {"heuristic", heuristic}},
                   nlohmann::json::object(), {"rankings.jsonl"});
  }
};

struct Evaluate {
  std::string rankings, labels, gain = "linear", zero = "one", mask, out;
  int k = 10;
  std::optional<Seed> seed;

  void setup(CLI::App& app) {
    app.add_option("--rankings", rankings, "rankings JSONL")->required();
    app.add_option("--labels", labels, "feature CSV or interactions file carrying engagement")
        ->required();
    app.add_option("--k", k, "cutoff")->capture_default_str();
    app.add_option("--gain", gain, "linear or exp")->capture_default_str();
    app.add_option("--zero-idcg", zero, "one or zero")->capture_default_str();
    app.add_option("--seed", seed, "seed recorded in the report fingerprint");
    app.add_option("--mask", mask, "mask recorded in the report fingerprint");
    app.add_option("--out", out, "output directory")->required();
  }

  void run() {
    const NdcgOptions opts = metric_options(k, gain, zero);
    const MetricReport report = mean_ndcg(read_rankings(fs::path(rankings)), read_labels(labels), opts);
    nlohmann::json fingerprint = {{"gain", gain}, {"zero_idcg", zero}, {"k", k},
                                  {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
                                  {"mask", nlohmann::json(nullptr)}};
    if (!mask.empty()) fingerprint["mask"] = parse_mask(mask).indices();
    ensure_dir(out);
    write_json_file(fs::path(out) / "report.json", report_to_json(report, fingerprint));
    std::ostringstream csv;
    write_report_csv(csv, report);
    write_text_file(fs::path(out) / "report.csv", csv.str());
    write_manifest(out, "evaluate", {{"rankings", rankings}, {"labels", labels}, {"fingerprint", fingerprint}},
                   seed ? nlohmann::json{{"root", *seed}} : nlohmann::json::object(),
                   {"report.json", "report.csv"});
  }
};

struct Pipeline {
  std::string config, out;
  std::optional<Seed> seed;

  void setup(CLI::App& app) {
    app.add_option("--config", config, "run config JSON")->required();
    app.add_option("--seed", seed, "override config seed");
    app.add_option("--out", out, "override output directory");
  }

  void run() {
    nlohmann::json j = read_json_file(config);
    if (seed && j.is_object()) j["seed"] = *seed;
    RunConfig cfg = parse_run_config(j, fs::path(config).parent_path());
    if (!out.empty()) cfg.output_dir = out;
    if (cfg.output_dir.empty()) {
      throw Error(ErrorKind::kInvalidConfig, "no output directory: set output_dir or pass --out");
    }
    run_pipeline(cfg, cfg.output_dir);
    write_manifest(cfg.output_dir, "pipeline", cfg.to_json(), {{"root", cfg.seed}},
                   {"report.json", "report.txt", "features.json", "models/", "rankings/"});
  }
};

template <typename T>
int dispatch(const std::string& name, const std::string& summary,
             const std::vector<std::string>& rest, std::ostream& out, std::ostream& err) {
  T cmd;
  CLI::App app(summary, "engrank " + name);
  cmd.setup(app);
  std::vector<std::string> reversed(rest.rbegin(), rest.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 2;
  }
  cmd.run();
  return 0;
}

using Dispatcher = int (*)(const std::string&, const std::string&, const std::vector<std::string>&,
                           std::ostream&, std::ostream&);

const std::vector<std::tuple<std::string, std::string, Dispatcher>>& commands() {
  static const std::vector<std::tuple<std::string, std::string, Dispatcher>> table = {
      {"gen-synth", "generate a synthetic dataset with a planted engagement model",
       &dispatch<GenSynth>},
      {"featurize", "extract and normalize the 27 features", &dispatch<Featurize>},
      {"select-features", "backward elimination by CV NDCG", &dispatch<SelectFeatures>},
      {"tune", "randomized hyperparameter search", &dispatch<Tune>},
      {"train", "train one model", &dispatch<Train>},
      {"rank", "rank each user's tweets with a trained model", &dispatch<Rank>},
      {"aggregate", "weighted Kemeny or Borda aggregation of rankings", &dispatch<Aggregate>},
      {"evaluate", "NDCG@k report for a rankings file", &dispatch<Evaluate>},
      {"pipeline", "end-to-end experiment from a run config", &dispatch<Pipeline>},
  };
  return table;
}

}  // namespace

std::string usage() {
  std::ostringstream s;
  s << "usage: engrank <subcommand> [options]\n\nsubcommands:\n";
  for (const auto& [name, summary, fn] : commands()) {
    s << "  " << name << std::string(18 - name.size(), ' ') << summary << '\n';
  }
  s << "\nrun `engrank <subcommand> --help` for its options\n";
  return s.str();
}

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage();
    return 2;
  }
  if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    out << usage();
    return 0;
  }
  if (args[0] == "--version") {
    out << build_id() << '\n';
    return 0;
  }
  for (const auto& [name, summary, fn] : commands()) {
    if (name != args[0]) continue;
    try {
      return fn(name, summary, {args.begin() + 1, args.end()}, out, err);
    } catch (const Error& e) {
      err << e.to_json().dump() << '\n';
      return 1;
    } catch (const std::exception& e) {
      err << nlohmann::json{{"error", "Internal"}, {"message", e.what()},
                            {"details", nlohmann::json::object()}}.dump()
          << '\n';
      return 1;
    }
  }
  err << "unknown subcommand: " << args[0] << "\n\n" << usage();
  return 2;
}

}  // namespace engrank::cli
