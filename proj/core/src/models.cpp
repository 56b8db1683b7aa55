#include "engrank/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "engrank/error.hpp"
#include "engrank/ltr.hpp"
#include "engrank/regression.hpp"

namespace engrank {
namespace {

[[noreturn]] void bad_param(const std::string& model, const std::string& key,
                            const std::string& why) {
  throw Error(ErrorKind::kInvalidConfig, model + ": parameter " + key + " " + why,
              {{"model", model}, {"parameter", key}});
}

// Defaults overlaid with the caller's values; rejects unknown keys.
nlohmann::json merged_params(const std::string& name, const nlohmann::json& params) {
  nlohmann::json p = default_params(name);
  if (params.is_null()) return p;
  if (!params.is_object()) {
    throw Error(ErrorKind::kInvalidConfig, name + ": parameters must be a JSON object");
  }
  for (const auto& [key, value] : params.items()) {
    if (!p.contains(key)) bad_param(name, key, "is not recognised");
    p[key] = value;
  }
  return p;
}

template <typename T>
T get(const nlohmann::json& p, const std::string& model, const std::string& key) {
  try {
    return p.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_param(model, key, "has the wrong type");
  }
}

int positive_int(const nlohmann::json& p, const std::string& model, const std::string& key,
                 int min = 1) {
  const int v = get<int>(p, model, key);
  if (v < min) bad_param(model, key, "must be at least " + std::to_string(min));
  return v;
}

double positive_real(const nlohmann::json& p, const std::string& model, const std::string& key) {
  const double v = get<double>(p, model, key);
  if (!(v > 0.0) || !std::isfinite(v)) bad_param(model, key, "must be positive");
  return v;
}

double nonnegative_real(const nlohmann::json& p, const std::string& model,
                        const std::string& key) {
  const double v = get<double>(p, model, key);
  if (!(v >= 0.0) || !std::isfinite(v)) bad_param(model, key, "must be nonnegative");
  return v;
}

LabelTransform label_transform(const nlohmann::json& p, const std::string& model) {
  const auto s = get<std::string>(p, model, "label_transform");
  if (s == "none") return LabelTransform::kNone;
  if (s == "log1p") return LabelTransform::kLog1p;
  bad_param(model, "label_transform", "must be none or log1p");
}

Eigen::VectorXd regression_targets(const FeatureTable& table, LabelTransform t) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(table.rows()));
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const double v = table.labels[i];
    y[static_cast<Eigen::Index>(i)] = t == LabelTransform::kLog1p ? std::log1p(std::max(v, 0.0)) : v;
  }
  return y;
}

std::shared_ptr<const Scorer> scorer_from_state(const std::string& name,
                                                const nlohmann::json& state) {
  if (name == "sgdr") return std::make_shared<LinearModel>(LinearModel::from_json(state));
  if (name == "bayridge") {
    return std::make_shared<BayesianRidgeModel>(BayesianRidgeModel::from_json(state));
  }
  if (name == "xtrees") return std::make_shared<ExtraTreesModel>(ExtraTreesModel::from_json(state));
  if (name == "listnet" || name == "ranksvm" || name == "listmle") {
    return std::make_shared<LinearRanker>(LinearRanker::from_json(name, state));
  }
  if (name == "adarank") return std::make_shared<BoostedRanker>(BoostedRanker::from_json(state));
  if (name == "ranknet" || name == "lambdarank") {
    return std::make_shared<NeuralRanker>(NeuralRanker::from_json(name, state));
  }
  throw Error(ErrorKind::kInvalidConfig, "unknown model " + name, {{"model", name}});
}

}  // namespace

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"sgdr",    "bayridge", "xtrees",
                                                 "listnet", "ranksvm",  "adarank",
                                                 "ranknet", "lambdarank", "listmle"};
  return names;
}

bool is_known_model(const std::string& name) {
  const auto& n = model_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

ModelFamily model_family(const std::string& name) {
  if (name == "sgdr" || name == "bayridge" || name == "xtrees") return ModelFamily::kRegressor;
  if (is_known_model(name)) return ModelFamily::kRanker;
  throw Error(ErrorKind::kInvalidConfig, "unknown model " + name, {{"model", name}});
}

nlohmann::json default_params(const std::string& name) {
  if (name == "sgdr") {
    return {{"lr", 0.01}, {"l2", 1e-4}, {"epochs", 100}, {"label_transform", "none"}};
  }
  if (name == "bayridge") {
    return {{"max_iter", 300}, {"tol", 1e-3}, {"alpha_init", nullptr},
            {"lambda_init", nullptr}, {"label_transform", "none"}};
  }
  if (name == "xtrees") {
    return {{"n_trees", 100}, {"k_features", 6}, {"min_samples_leaf", 2},
            {"label_transform", "none"}};
  }
  if (name == "listnet") return {{"lr", 0.1}, {"epochs", 200}, {"temperature", 1.0}, {"l2", 0.0}};
  if (name == "ranksvm") return {{"c", 100.0}, {"epochs", 200}, {"lr", 0.01}};
  if (name == "listmle") return {{"lr", 0.05}, {"epochs", 200}, {"l2", 0.0}};
  if (name == "adarank") return {{"rounds", 50}};
  if (name == "ranknet" || name == "lambdarank") {
    return {{"hidden", 10}, {"lr", 0.05}, {"epochs", 500}, {"random_output_init", false}};
  }
  throw Error(ErrorKind::kInvalidConfig, "unknown model " + name, {{"model", name}});
}

TrainedModel train_model(const std::string& name, const nlohmann::json& params,
                         const FeatureTable& table, const FeatureMask& mask,
                         const TrainOptions& options) {
  mask.validate();
  const nlohmann::json p = merged_params(name, params);
  TrainedModel out;
  out.name = name;
  out.mask = mask;
  out.params = p;

  if (model_family(name) == ModelFamily::kRegressor) {
    const Eigen::MatrixXd X = table.masked(mask);
    const Eigen::VectorXd y = regression_targets(table, label_transform(p, name));
    if (name == "sgdr") {
      SgdRegressorConfig cfg;
      cfg.lr = positive_real(p, name, "lr");
      cfg.l2 = nonnegative_real(p, name, "l2");
      cfg.epochs = positive_int(p, name, "epochs");
      cfg.seed = options.seed;
      out.scorer = std::make_shared<LinearModel>(train_sgd_regressor(X, y, cfg));
    } else if (name == "bayridge") {
      BayesianRidgeConfig cfg;
      cfg.max_iter = positive_int(p, name, "max_iter", 0);
      cfg.tol = positive_real(p, name, "tol");
      if (!p["alpha_init"].is_null()) cfg.alpha_init = positive_real(p, name, "alpha_init");
      if (!p["lambda_init"].is_null()) cfg.lambda_init = positive_real(p, name, "lambda_init");
      out.scorer = std::make_shared<BayesianRidgeModel>(train_bayesian_ridge(X, y, cfg));
    } else {
      ExtraTreesConfig cfg;
      cfg.n_trees = positive_int(p, name, "n_trees");
      cfg.k_features = std::min(positive_int(p, name, "k_features"),
                                static_cast<int>(mask.count()));
      out.params["k_features"] = cfg.k_features;
      cfg.min_samples_leaf = positive_int(p, name, "min_samples_leaf");
      cfg.seed = options.seed;
      cfg.threads = options.threads;
      out.scorer = std::make_shared<ExtraTreesModel>(train_extra_trees(X, y, cfg));
    }
    return out;
  }

  const auto groups = make_query_groups(table, mask);
  if (name == "listnet") {
    ListNetConfig cfg;
    cfg.lr = positive_real(p, name, "lr");
    cfg.epochs = positive_int(p, name, "epochs");
    cfg.temperature = positive_real(p, name, "temperature");
    cfg.l2 = nonnegative_real(p, name, "l2");
    cfg.seed = options.seed;
    out.scorer = std::make_shared<LinearRanker>(train_listnet(groups, cfg));
  } else if (name == "ranksvm") {
    RankSvmConfig cfg;
    cfg.c = positive_real(p, name, "c");
    cfg.epochs = positive_int(p, name, "epochs");
    cfg.lr = positive_real(p, name, "lr");
    cfg.seed = options.seed;
    out.scorer = std::make_shared<LinearRanker>(train_ranking_svm(groups, cfg));
  } else if (name == "listmle") {
    ListMleConfig cfg;
    cfg.lr = positive_real(p, name, "lr");
    cfg.epochs = positive_int(p, name, "epochs");
    cfg.l2 = nonnegative_real(p, name, "l2");
    cfg.seed = options.seed;
    out.scorer = std::make_shared<LinearRanker>(train_listmle(groups, cfg));
  } else if (name == "adarank") {
    AdaRankConfig cfg;
    cfg.rounds = positive_int(p, name, "rounds");
    cfg.metric = options.metric;
    out.scorer = std::make_shared<BoostedRanker>(train_adarank(groups, cfg));
  } else {
    NeuralRankConfig cfg;
    cfg.hidden = positive_int(p, name, "hidden");
    cfg.lr = positive_real(p, name, "lr");
    cfg.epochs = positive_int(p, name, "epochs");
    cfg.random_output_init = get<bool>(p, name, "random_output_init");
    cfg.seed = options.seed;
    cfg.metric = options.metric;
    out.scorer = std::make_shared<NeuralRanker>(name == "ranknet" ? train_ranknet(groups, cfg)
                                                                  : train_lambdarank(groups, cfg));
  }
  return out;
}

RankingSet TrainedModel::rank(const FeatureTable& table) const {
  const Eigen::MatrixXd X = table.masked(mask);
  const Eigen::VectorXd s = scorer->score_matrix(X);
  RankingSet out;
  for (const auto& [user, rows] : table.user_rows()) {
    std::vector<std::string> ids;
    std::vector<double> scores;
    for (std::size_t r : rows) {
      ids.push_back(table.tweet_ids[r]);
      scores.push_back(s[static_cast<Eigen::Index>(r)]);
    }
    out.emplace(user, rank_by_scores(user, ids, scores));
  }
  return out;
}

nlohmann::json TrainedModel::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"model", name},
          {"mask", mask_to_json(mask)},
          {"params", params},
          {"state", scorer->to_json()}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorKind::kSchemaMismatch, "unsupported model format version",
                  {{"format_version", version}, {"supported", kModelFormatVersion}});
    }
    TrainedModel m;
    m.name = j.at("model").get<std::string>();
    m.mask = mask_from_json(j.at("mask"));
    m.params = j.value("params", nlohmann::json::object());
    m.scorer = scorer_from_state(m.name, j.at("state"));
    if (m.scorer->num_features() != m.mask.count()) {
      throw Error(ErrorKind::kSchemaMismatch, "model width does not match its mask",
                  {{"features", m.scorer->num_features()}, {"mask", m.mask.count()}});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaMismatch, std::string("malformed model JSON: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string(), {{"path", path.string()}});
  out << model.to_json().dump(2) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string(), {{"path", path.string()}});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaMismatch, std::string("malformed model JSON: ") + e.what(),
                {{"path", path.string()}});
  }
  return TrainedModel::from_json(j);
}

}  // namespace engrank
