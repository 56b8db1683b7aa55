#include "engrank/feature_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "engrank/csv.hpp"
#include "engrank/error.hpp"

namespace engrank {
namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string column_name(std::size_t j) {
  std::string s = "f";
  if (j < 10) s.push_back('0');
  return s + std::to_string(j);
}

}  // namespace

std::vector<std::string> FeatureTable::users() const {
  std::set<std::string> s(user_ids.begin(), user_ids.end());
  return {s.begin(), s.end()};
}

std::map<std::string, std::vector<std::size_t>> FeatureTable::user_rows() const {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t r = 0; r < rows(); ++r) out[user_ids[r]].push_back(r);
  return out;
}

FeatureTable FeatureTable::select_rows(const std::vector<std::size_t>& rows) const {
  FeatureTable out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    out.tweet_ids.push_back(tweet_ids[r]);
    out.user_ids.push_back(user_ids[r]);
    out.labels.push_back(labels[r]);
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(r));
  }
  return out;
}

FeatureTable FeatureTable::select_users(const std::set<std::string>& users) const {
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < rows(); ++r) {
    if (users.count(user_ids[r])) keep.push_back(r);
  }
  return select_rows(keep);
}

Eigen::MatrixXd FeatureTable::masked(const FeatureMask& mask) const {
  const auto cols = mask.indices();
  Eigen::MatrixXd out(features.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = features.col(static_cast<Eigen::Index>(cols[c]));
  }
  return out;
}

std::map<std::string, double> FeatureTable::label_map() const {
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < rows(); ++r) out[tweet_ids[r]] = labels[r];
  return out;
}

FeatureVector FeatureTable::row_vector(std::size_t row) const {
  FeatureVector v;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    v[j] = features(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
  }
  return v;
}

FeatureTable raw_feature_table(const Dataset& d, const MovieStatsTable& movie_stats,
                               const FeatureOptions& options) {
  const auto aggregates = compute_user_aggregates(d);
  const Timestamp ref = options.reference_time.value_or(d.reference_time);
  FeatureTable t;
  t.features.resize(static_cast<Eigen::Index>(d.interactions.size()),
                    static_cast<Eigen::Index>(kNumFeatures));
  for (std::size_t r = 0; r < d.interactions.size(); ++r) {
    const auto& i = d.interactions[r];
    const auto profile = d.profiles.find(i.user_id);
    if (profile == d.profiles.end()) {
      throw Error(ErrorKind::kMissingProfile, "no profile for user " + i.user_id,
                  {{"user_id", i.user_id}});
    }
    const FeatureVector v = extract(i, profile->second, movie_stats.lookup(i.movie_id),
                                    aggregates.at(i.user_id), ref, options.holidays);
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      t.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v[j];
    }
    t.tweet_ids.push_back(i.tweet_id);
    t.user_ids.push_back(i.user_id);
    t.labels.push_back(static_cast<double>(i.engagement));
  }
  return t;
}

Normalizer fit_normalizer(const FeatureTable& raw) {
  std::vector<FeatureVector> rows;
  rows.reserve(raw.rows());
  for (std::size_t r = 0; r < raw.rows(); ++r) rows.push_back(raw.row_vector(r));
  return fit_normalizer(std::span<const FeatureVector>(rows));
}

FeatureTable normalize_table(const FeatureTable& raw, const Normalizer& n) {
  FeatureTable out = raw;
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    const FeatureVector z = apply_normalizer(n, raw.row_vector(r));
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = z[j];
    }
  }
  return out;
}

FeatureContext fit_feature_context(const Dataset& train, const FeatureOptions& options) {
  FeatureContext ctx;
  ctx.options = options;
  ctx.movie_stats = compute_movie_stats_table(train);
  ctx.normalizer = fit_normalizer(raw_feature_table(train, ctx.movie_stats, options));
  return ctx;
}

FeatureTable featurize(const Dataset& d, const FeatureContext& context) {
  return normalize_table(raw_feature_table(d, context.movie_stats, context.options),
                         context.normalizer);
}

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  out << "tweet_id,user_id,engagement";
  for (std::size_t j = 0; j < kNumFeatures; ++j) out << ',' << column_name(j);
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << csv::escape_field(table.tweet_ids[r]) << ',' << csv::escape_field(table.user_ids[r])
        << ',' << format_double(table.labels[r]);
    for (Eigen::Index j = 0; j < table.features.cols(); ++j) {
      out << ',' << format_double(table.features(static_cast<Eigen::Index>(r), j));
    }
    out << '\n';
  }
}

FeatureTable read_feature_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  auto fail = [&](const std::string& field, const std::string& reason) {
    throw Error(ErrorKind::kSchemaViolation,
                source + ":" + std::to_string(reader.line_no()) + ": " + field + ": " + reason,
                {{"source", source}, {"line_no", reader.line_no()}, {"field", field},
                 {"reason", reason}});
  };
  auto header = reader.next();
  if (!header) fail("<header>", "empty file");
  const std::size_t expected = 3 + kNumFeatures;
  if (header->size() != expected || (*header)[0] != "tweet_id" || (*header)[1] != "user_id" ||
      (*header)[2] != "engagement") {
    fail("<header>", "expected tweet_id,user_id,engagement,f00..f26");
  }
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if ((*header)[3 + j] != column_name(j)) fail(column_name(j), "missing column");
  }
  FeatureTable t;
  std::vector<std::vector<double>> values;
  auto parse = [&](const std::string& s, const std::string& field) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail(field, "expected finite number, got '" + s + "'");
    }
    return v;
  };
  while (auto rec = reader.next()) {
    if (rec->size() != expected) fail("<record>", "wrong field count");
    t.tweet_ids.push_back((*rec)[0]);
    t.user_ids.push_back((*rec)[1]);
    t.labels.push_back(parse((*rec)[2], "engagement"));
    std::vector<double> row(kNumFeatures);
    for (std::size_t j = 0; j < kNumFeatures; ++j) row[j] = parse((*rec)[3 + j], column_name(j));
    values.push_back(std::move(row));
  }
  t.features.resize(static_cast<Eigen::Index>(values.size()),
                    static_cast<Eigen::Index>(kNumFeatures));
  for (std::size_t r = 0; r < values.size(); ++r) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      t.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = values[r][j];
    }
  }
  return t;
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string(), {{"path", path.string()}});
  return read_feature_csv(in, path.string());
}

nlohmann::json mask_to_json(const FeatureMask& mask) {
  nlohmann::json names = nlohmann::json::array();
  for (std::size_t i : mask.indices()) names.push_back(feature_name(i));
  return {{"indices", mask.indices()}, {"names", names}};
}

FeatureMask mask_from_json(const nlohmann::json& j) {
  if (j.is_string()) return FeatureMask::preset(j.get<std::string>());
  const auto& indices = j.is_array() ? j : j.at("indices");
  const auto idx = indices.get<std::vector<std::size_t>>();
  FeatureMask m = FeatureMask::from_indices(idx);
  m.validate();
  return m;
}

nlohmann::json feature_context_to_json(const FeatureContext& ctx) {
  nlohmann::json names = nlohmann::json::array();
  for (const auto& info : feature_schema()) names.push_back(info.name);
  nlohmann::json movies = nlohmann::json::object();
  for (const auto& [id, m] : ctx.movie_stats.movies) {
    movies[id] = {{"tweet_count", m.tweet_count}, {"mean_rating", m.mean_rating}};
  }
  nlohmann::json j = {
      {"schema_version", kFeatureSchemaVersion},
      {"feature_names", names},
      {"normalizer",
       {{"mean", ctx.normalizer.mean},
        {"std", ctx.normalizer.stddev},
        {"fitted_on", ctx.normalizer.fitted_on}}},
      {"mask", mask_to_json(ctx.mask)},
      {"movie_stats", {{"global_mean_rating", ctx.movie_stats.global_mean_rating},
                       {"movies", movies}}},
      {"holidays", ctx.options.holidays.dates},
  };
  j["reference_time"] = ctx.options.reference_time
                            ? nlohmann::json(format_iso8601(*ctx.options.reference_time))
                            : nlohmann::json(nullptr);
  return j;
}

FeatureContext feature_context_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kFeatureSchemaVersion) {
    throw Error(ErrorKind::kSchemaMismatch, "unsupported feature sidecar schema_version",
                {{"schema_version", j.value("schema_version", 0)}});
  }
  FeatureContext ctx;
  const auto& n = j.at("normalizer");
  const auto mean = n.at("mean").get<std::vector<double>>();
  const auto sd = n.at("std").get<std::vector<double>>();
  if (mean.size() != kNumFeatures || sd.size() != kNumFeatures) {
    throw Error(ErrorKind::kSchemaMismatch, "normalizer width mismatch");
  }
  std::copy(mean.begin(), mean.end(), ctx.normalizer.mean.begin());
  std::copy(sd.begin(), sd.end(), ctx.normalizer.stddev.begin());
  ctx.normalizer.fitted_on = n.value("fitted_on", std::size_t{0});
  if (j.contains("mask")) ctx.mask = mask_from_json(j["mask"]);
  if (j.contains("movie_stats")) {
    const auto& ms = j["movie_stats"];
    ctx.movie_stats.global_mean_rating = ms.value("global_mean_rating", 0.0);
    for (const auto& [id, m] : ms.at("movies").items()) {
      ctx.movie_stats.movies[id] =
          MovieStats{id, m.at("tweet_count").get<std::int64_t>(), m.at("mean_rating").get<double>()};
    }
  }
  if (j.contains("holidays")) {
    ctx.options.holidays.dates = j["holidays"].get<std::set<std::string>>();
  }
  if (j.contains("reference_time") && j["reference_time"].is_string()) {
    ctx.options.reference_time = parse_iso8601(j["reference_time"].get<std::string>());
  }
  return ctx;
}

}  // namespace engrank
