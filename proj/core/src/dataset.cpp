#include "engrank/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "engrank/csv.hpp"
#include "engrank/error.hpp"

namespace engrank {
namespace {

using nlohmann::json;

[[noreturn]] void schema_violation(const std::string& source, std::size_t line,
                                   const std::string& field, const std::string& reason) {
  throw Error(ErrorKind::kSchemaViolation,
              source + ":" + std::to_string(line) + ": field '" + field + "': " + reason,
              {{"source", source}, {"line_no", line}, {"field", field}, {"reason", reason}});
}

DataFormat resolve_format(DataFormat f, const std::filesystem::path& path) {
  if (f != DataFormat::kAuto) return f;
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return DataFormat::kJsonl;
  return DataFormat::kCsv;
}

// Field accessor that hides the difference between a CSV record (with a
// header index) and a JSON object.
class RecordView {
 public:
  RecordView(const std::string& source, std::size_t line) : source_(source), line_(line) {}

  void bind_csv(const std::vector<std::string>* fields,
                const std::unordered_map<std::string, std::size_t>* index) {
    fields_ = fields;
    index_ = index;
    object_ = nullptr;
  }
  void bind_json(const json* object) {
    object_ = object;
    fields_ = nullptr;
  }

  std::string text(const std::string& field, bool allow_empty = false) const {
    std::string value;
    if (object_) {
      auto it = object_->find(field);
      if (it == object_->end() || it->is_null()) {
        schema_violation(source_, line_, field, "missing");
      }
      if (it->is_string()) {
        value = it->get<std::string>();
      } else if (it->is_number_integer() || it->is_number_unsigned()) {
        value = it->dump();
      } else {
        schema_violation(source_, line_, field, "expected string");
      }
    } else {
      auto it = index_->find(field);
      if (it == index_->end() || it->second >= fields_->size()) {
        schema_violation(source_, line_, field, "missing");
      }
      value = (*fields_)[it->second];
    }
    if (!allow_empty && value.empty()) schema_violation(source_, line_, field, "empty");
    return value;
  }

  std::int64_t integer(const std::string& field) const {
    if (object_) {
      auto it = object_->find(field);
      if (it != object_->end() && it->is_number()) {
        const double v = it->get<double>();
        if (!std::isfinite(v) || std::floor(v) != v) {
          schema_violation(source_, line_, field, "expected integer");
        }
        return static_cast<std::int64_t>(v);
      }
    }
    const std::string s = text(field);
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      schema_violation(source_, line_, field, "expected integer, got '" + s + "'");
    }
    return out;
  }

  std::int64_t count(const std::string& field) const {
    const std::int64_t v = integer(field);
    if (v < 0) schema_violation(source_, line_, field, "must be >= 0");
    return v;
  }

  Timestamp timestamp(const std::string& field) const {
    const std::string s = text(field);
    auto t = parse_iso8601(s);
    if (!t) schema_violation(source_, line_, field, "expected ISO-8601 UTC, got '" + s + "'");
    return *t;
  }

  std::size_t line() const { return line_; }
  const std::string& source() const { return source_; }
  void set_line(std::size_t line) { line_ = line; }

 private:
  const std::string& source_;
  std::size_t line_;
  const std::vector<std::string>* fields_ = nullptr;
  const std::unordered_map<std::string, std::size_t>* index_ = nullptr;
  const json* object_ = nullptr;
};

Interaction parse_interaction(const RecordView& r) {
  Interaction i;
  i.tweet_id = r.text("tweet_id");
  i.user_id = r.text("user_id");
  i.movie_id = r.text("movie_id");
  const std::int64_t rating = r.integer("rating");
  if (rating < 1 || rating > 10) {
    schema_violation(r.source(), r.line(), "rating", "must be in 1..10");
  }
  i.rating = static_cast<int>(rating);
  i.tweeted_at = r.timestamp("tweeted_at");
  i.language = r.text("language");
  i.mention_count = r.count("mention_count");
  i.hashtag_count = r.count("hashtag_count");
  i.engagement = r.count("engagement");
  return i;
}

UserProfile parse_profile(const RecordView& r) {
  UserProfile p;
  p.user_id = r.text("user_id");
  p.followers = r.count("followers");
  p.followees = r.count("followees");
  p.statuses = r.count("statuses");
  p.liked_tweets = r.count("liked_tweets");
  p.lists = r.count("lists");
  p.account_created_at = r.timestamp("account_created_at");
  p.default_language = r.text("default_language");
  return p;
}

std::vector<std::string> split_header(const std::string& header) {
  return csv::split_record(header);
}

template <typename Row, typename Parse>
std::vector<Row> read_records(std::istream& in, DataFormat format, const std::string& source,
                              const std::string& expected_header, Parse parse) {
  std::vector<Row> rows;
  RecordView view(source, 0);
  if (format == DataFormat::kJsonl) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      json object;
      try {
        object = json::parse(line);
      } catch (const json::parse_error& e) {
        schema_violation(source, line_no, "<record>", std::string("invalid JSON: ") + e.what());
      }
      if (!object.is_object()) schema_violation(source, line_no, "<record>", "expected object");
      view.set_line(line_no);
      view.bind_json(&object);
      rows.push_back(parse(view));
    }
    return rows;
  }

  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return rows;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header->size(); ++c) index[(*header)[c]] = c;
  for (const auto& name : split_header(expected_header)) {
    if (!index.count(name)) schema_violation(source, reader.line_no(), name, "missing column");
  }
  while (auto record = reader.next()) {
    if (record->size() != header->size()) {
      schema_violation(source, reader.line_no(), "<record>",
                       "expected " + std::to_string(header->size()) + " fields, got " +
                           std::to_string(record->size()));
    }
    view.set_line(reader.line_no());
    view.bind_csv(&*record, &index);
    rows.push_back(parse(view));
  }
  return rows;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open " + path.string(), {{"path", path.string()}});
  }
  return in;
}

}  // namespace

std::vector<std::string> Dataset::user_ids() const {
  std::set<std::string> users;
  for (const auto& i : interactions) users.insert(i.user_id);
  return {users.begin(), users.end()};
}

Dataset Dataset::subset(const std::set<std::string>& users) const {
  Dataset out;
  out.reference_time = reference_time;
  for (const auto& i : interactions) {
    if (users.count(i.user_id)) out.interactions.push_back(i);
  }
  for (const auto& [id, p] : profiles) {
    if (users.count(id)) out.profiles.emplace(id, p);
  }
  return out;
}

std::vector<Interaction> read_interactions(std::istream& in, DataFormat format,
                                           const std::string& source) {
  return read_records<Interaction>(in, format == DataFormat::kAuto ? DataFormat::kCsv : format,
                                   source, kInteractionsHeader, parse_interaction);
}

std::vector<UserProfile> read_profiles(std::istream& in, DataFormat format,
                                       const std::string& source) {
  return read_records<UserProfile>(in, format == DataFormat::kAuto ? DataFormat::kCsv : format,
                                   source, kProfilesHeader, parse_profile);
}

Dataset assemble_dataset(std::vector<Interaction> interactions,
                         const std::vector<UserProfile>& profiles,
                         std::optional<Timestamp> reference_time) {
  if (interactions.empty()) throw Error(ErrorKind::kEmptyDataset, "dataset has no interactions");
  Dataset d;
  for (const auto& p : profiles) {
    if (!d.profiles.emplace(p.user_id, p).second) {
      throw Error(ErrorKind::kSchemaViolation, "duplicate profile for user " + p.user_id,
                  {{"field", "user_id"}, {"user_id", p.user_id}, {"reason", "duplicate"}});
    }
  }
  std::unordered_set<std::string> seen;
  Timestamp latest = interactions.front().tweeted_at;
  for (std::size_t n = 0; n < interactions.size(); ++n) {
    const auto& i = interactions[n];
    auto it = d.profiles.find(i.user_id);
    if (it == d.profiles.end()) {
      throw Error(ErrorKind::kMissingProfile, "no profile for user " + i.user_id,
                  {{"user_id", i.user_id}, {"record", n + 1}});
    }
    if (!seen.insert(i.tweet_id).second) {
      throw Error(ErrorKind::kSchemaViolation, "duplicate tweet_id " + i.tweet_id,
                  {{"record", n + 1}, {"field", "tweet_id"}, {"reason", "duplicate"}});
    }
    if (i.tweeted_at < it->second.account_created_at) {
      throw Error(ErrorKind::kSchemaViolation,
                  "tweet " + i.tweet_id + " predates account creation of " + i.user_id,
                  {{"record", n + 1}, {"field", "tweeted_at"},
                   {"reason", "before account_created_at"}});
    }
    latest = std::max(latest, i.tweeted_at);
  }
  if (reference_time && *reference_time < latest) {
    throw Error(ErrorKind::kInvalidConfig,
                "reference time " + format_iso8601(*reference_time) +
                    " precedes latest tweet " + format_iso8601(latest),
                {{"reference_time", format_iso8601(*reference_time)}});
  }
  d.reference_time = reference_time.value_or(latest);
  d.interactions = std::move(interactions);
  return d;
}

Dataset load_interactions(const std::filesystem::path& interactions_path,
                          const std::filesystem::path& profiles_path,
                          const LoadOptions& options) {
  auto in = open_or_throw(interactions_path);
  auto rows = read_interactions(in, resolve_format(options.format, interactions_path),
                                interactions_path.string());
  auto pin = open_or_throw(profiles_path);
  auto profiles = read_profiles(pin, resolve_format(options.profiles_format, profiles_path),
                                profiles_path.string());
  return assemble_dataset(std::move(rows), profiles, options.reference_time);
}

void write_interactions(std::ostream& out, const std::vector<Interaction>& rows,
                        DataFormat format) {
  if (format == DataFormat::kJsonl) {
    for (const auto& i : rows) {
      json o = {{"tweet_id", i.tweet_id},           {"user_id", i.user_id},
                {"movie_id", i.movie_id},           {"rating", i.rating},
                {"tweeted_at", format_iso8601(i.tweeted_at)},
                {"language", i.language},           {"mention_count", i.mention_count},
                {"hashtag_count", i.hashtag_count}, {"engagement", i.engagement}};
      out << o.dump() << '\n';
    }
    return;
  }
  out << kInteractionsHeader << '\n';
  for (const auto& i : rows) {
    out << csv::escape_field(i.tweet_id) << ',' << csv::escape_field(i.user_id) << ','
        << csv::escape_field(i.movie_id) << ',' << i.rating << ','
        << format_iso8601(i.tweeted_at) << ',' << csv::escape_field(i.language) << ','
        << i.mention_count << ',' << i.hashtag_count << ',' << i.engagement << '\n';
  }
}

void write_profiles(std::ostream& out, const std::map<std::string, UserProfile>& profiles,
                    DataFormat format) {
  if (format == DataFormat::kJsonl) {
    for (const auto& [id, p] : profiles) {
      json o = {{"user_id", p.user_id},
                {"followers", p.followers},
                {"followees", p.followees},
                {"statuses", p.statuses},
                {"liked_tweets", p.liked_tweets},
                {"lists", p.lists},
                {"account_created_at", format_iso8601(p.account_created_at)},
                {"default_language", p.default_language}};
      out << o.dump() << '\n';
    }
    return;
  }
  out << kProfilesHeader << '\n';
  for (const auto& [id, p] : profiles) {
    out << csv::escape_field(p.user_id) << ',' << p.followers << ',' << p.followees << ','
        << p.statuses << ',' << p.liked_tweets << ',' << p.lists << ','
        << format_iso8601(p.account_created_at) << ',' << csv::escape_field(p.default_language)
        << '\n';
  }
}

std::vector<std::vector<std::string>> FoldPlan::folds() const {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(k));
  for (const auto& [user, fold] : assignment) out[static_cast<std::size_t>(fold)].push_back(user);
  return out;
}

std::set<std::string> FoldPlan::fold_users(int fold) const {
  std::set<std::string> out;
  for (const auto& [user, f] : assignment) {
    if (f == fold) out.insert(user);
  }
  return out;
}

std::set<std::string> FoldPlan::users_outside(int fold) const {
  std::set<std::string> out;
  for (const auto& [user, f] : assignment) {
    if (f != fold) out.insert(user);
  }
  return out;
}

FoldPlan split_user_folds(std::vector<std::string> users, int k, Seed seed) {
  if (k < 2) {
    throw Error(ErrorKind::kInvalidConfig, "fold count must be >= 2", {{"k", k}});
  }
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  if (users.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::kTooFewUsers,
                std::to_string(users.size()) + " users cannot fill " + std::to_string(k) +
                    " folds",
                {{"users", users.size()}, {"k", k}});
  }
  Rng rng(seed);
  rng.shuffle(users);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  for (std::size_t i = 0; i < users.size(); ++i) {
    plan.assignment[users[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return plan;
}

FoldPlan split_folds(const Dataset& d, int k, Seed seed) {
  return split_user_folds(d.user_ids(), k, seed);
}

std::map<std::string, std::vector<Interaction>> group_by_user(const Dataset& d) {
  std::map<std::string, std::vector<Interaction>> groups;
  for (const auto& i : d.interactions) groups[i.user_id].push_back(i);
  for (auto& [user, rows] : groups) {
    std::sort(rows.begin(), rows.end(), [](const Interaction& a, const Interaction& b) {
      if (a.tweeted_at != b.tweeted_at) return a.tweeted_at < b.tweeted_at;
      return a.tweet_id < b.tweet_id;
    });
  }
  return groups;
}

double softplus(double x) {
  // log(1 + e^x) without overflow.
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double PlantedModel::utility(const std::array<double, kSlots>& f) const {
  double u = bias;
  for (std::size_t j = 0; j < kSlots; ++j) {
    u += linear[j] * f[j];
    if (quadratic[j] != 0.0) {
      const double dx = f[j] - center[j];
      u += quadratic[j] * dx * dx;
    }
  }
  return u;
}

std::int64_t PlantedModel::label(const std::array<double, kSlots>& f) const {
  return static_cast<std::int64_t>(std::llround(softplus(utility(f))));
}

namespace {

std::string padded(char prefix, std::size_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

int digits_for(std::size_t n) {
  int w = 1;
  while (n >= 10) {
    n /= 10;
    ++w;
  }
  return std::max(w, 4);
}

std::int64_t lognormal_count(Rng& rng, double mu, double sigma) {
  return static_cast<std::int64_t>(std::floor(std::exp(rng.normal(mu, sigma))));
}

}  // namespace

SynthResult generate_synthetic(const SynthConfig& cfg, Seed seed) {
  if (cfg.users < 1 || cfg.tweets_per_user < 1 || cfg.movies < 1 || !(cfg.noise >= 0.0) ||
      !std::isfinite(cfg.noise)) {
    throw Error(ErrorKind::kInvalidConfig, "synthetic config requires users, tweets_per_user, "
                                           "movies >= 1 and a finite noise >= 0",
                {{"users", cfg.users}, {"tweets_per_user", cfg.tweets_per_user},
                 {"movies", cfg.movies}, {"noise", cfg.noise}});
  }

  PlantedModel planted;
  planted.noise = cfg.noise;
  planted.bias = -2.0;
  planted.linear[0] = 0.0002;  // followers
  planted.linear[16] = 0.8;    // mention count
  planted.linear[17] = 0.35;   // hashtag count
  planted.linear[25] = 0.3;    // same language
  planted.linear[26] = 0.5;    // English
  if (cfg.utility == PlantedUtility::kLinear) {
    planted.linear[15] = 0.45;  // rate
  } else {
    planted.bias = -1.0;
    planted.quadratic[15] = 0.25;
    planted.center[15] = 5.5;
  }

  Rng rng(derive_seed(seed, "synthetic"));
  // Separate stream so the noise rate never shifts the feature draws.
  Rng noise_rng(derive_seed(seed, "label-noise"));
  static const std::array<const char*, 5> kLanguages = {"en", "es", "fr", "de", "pt"};
  const Timestamp accounts_from = *parse_iso8601("2008-01-01T00:00:00Z");
  const Timestamp accounts_to = *parse_iso8601("2013-12-31T00:00:00Z");
  const Timestamp tweets_from = *parse_iso8601("2014-01-01T00:00:00Z");
  const Timestamp tweets_to = *parse_iso8601("2014-07-31T00:00:00Z");

  std::vector<double> movie_quality(static_cast<std::size_t>(cfg.movies));
  for (auto& q : movie_quality) q = rng.uniform(4.0, 9.0);

  const int uw = digits_for(static_cast<std::size_t>(cfg.users));
  const int mw = digits_for(static_cast<std::size_t>(cfg.movies));
  const int tw = digits_for(static_cast<std::size_t>(cfg.users) *
                            static_cast<std::size_t>(cfg.tweets_per_user));

  std::vector<Interaction> interactions;
  std::vector<UserProfile> profiles;
  interactions.reserve(static_cast<std::size_t>(cfg.users) *
                       static_cast<std::size_t>(cfg.tweets_per_user));
  std::size_t tweet_counter = 0;
  for (int u = 0; u < cfg.users; ++u) {
    UserProfile p;
    p.user_id = padded('u', static_cast<std::size_t>(u), uw);
    p.followers = lognormal_count(rng, 5.0, 1.5);
    p.followees = lognormal_count(rng, 5.0, 1.0);
    p.statuses = lognormal_count(rng, 7.0, 1.5);
    p.liked_tweets = lognormal_count(rng, 4.0, 1.5);
    p.lists = rng.poisson(2.0);
    p.account_created_at = accounts_from + static_cast<Timestamp>(rng.index(
                                               static_cast<std::uint64_t>(accounts_to - accounts_from)));
    const double lang_draw = rng.uniform();
    p.default_language = lang_draw < 0.7 ? "en" : kLanguages[1 + rng.index(kLanguages.size() - 1)];
    profiles.push_back(p);

    for (int t = 0; t < cfg.tweets_per_user; ++t) {
      Interaction i;
      i.tweet_id = padded('t', tweet_counter++, tw);
      i.user_id = p.user_id;
      const std::size_t movie = rng.index(movie_quality.size());
      i.movie_id = padded('m', movie, mw);
      const double r = std::round(rng.normal(movie_quality[movie], 1.5));
      i.rating = static_cast<int>(std::clamp(r, 1.0, 10.0));
      i.tweeted_at = tweets_from + static_cast<Timestamp>(rng.index(
                                       static_cast<std::uint64_t>(tweets_to - tweets_from)));
      i.language = rng.uniform() < 0.8 ? p.default_language
                                       : std::string(kLanguages[rng.index(kLanguages.size())]);
      i.mention_count = std::min<std::int64_t>(rng.poisson(0.5), 4);
      i.hashtag_count = std::min<std::int64_t>(rng.poisson(0.4), 4);

      std::array<double, PlantedModel::kSlots> f{};
      f[0] = static_cast<double>(p.followers);
      f[15] = i.rating;
      f[16] = static_cast<double>(i.mention_count);
      f[17] = static_cast<double>(i.hashtag_count);
      f[25] = i.language == p.default_language ? 1.0 : 0.0;
      f[26] = i.language == "en" ? 1.0 : 0.0;
      i.engagement = planted.label(f) + noise_rng.poisson(cfg.noise);
      interactions.push_back(std::move(i));
    }
  }
  SynthResult result{assemble_dataset(std::move(interactions), profiles), planted};
  return result;
}

}  // namespace engrank
