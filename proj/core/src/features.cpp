#include "engrank/features.hpp"

#include <algorithm>
#include <cmath>

#include "engrank/error.hpp"

namespace engrank {

const std::array<FeatureInfo, kNumFeatures>& feature_schema() {
  using C = FeatureCategory;
  using T = FeatureType;
  static const std::array<FeatureInfo, kNumFeatures> kSchema = {{
      {"followers", C::kUser, T::kNumerical},
      {"followees", C::kUser, T::kNumerical},
      {"tweets", C::kUser, T::kNumerical},
      {"imdb_tweets", C::kUser, T::kNumerical},
      {"user_average_rating", C::kUser, T::kNumerical},
      {"liked_tweets", C::kUser, T::kNumerical},
      {"lists", C::kUser, T::kNumerical},
      {"tweeting_frequency", C::kUser, T::kNumerical},
      {"attracting_followers_frequency", C::kUser, T::kNumerical},
      {"following_frequency", C::kUser, T::kNumerical},
      {"like_frequency", C::kUser, T::kNumerical},
      {"followers_per_followee", C::kUser, T::kNumerical},
      {"followers_minus_followees", C::kUser, T::kNumerical},
      {"movie_tweet_count", C::kMovie, T::kNumerical},
      {"movie_average_rating", C::kMovie, T::kNumerical},
      {"rate", C::kTweet, T::kNumerical},
      {"mention_count", C::kTweet, T::kNumerical},
      {"hashtag_count", C::kTweet, T::kNumerical},
      {"tweet_age_days", C::kTweet, T::kNumerical},
      {"membership_age_at_tweet_days", C::kTweet, T::kNumerical},
      {"opinion_difference", C::kTweet, T::kNumerical},
      {"hour", C::kTweet, T::kCategorical},
      {"day_of_week", C::kTweet, T::kCategorical},
      {"time_of_day", C::kTweet, T::kCategorical},
      {"holiday", C::kTweet, T::kBoolean},
      {"same_language", C::kTweet, T::kBoolean},
      {"english", C::kTweet, T::kBoolean},
  }};
  return kSchema;
}

std::string_view feature_name(std::size_t index) { return feature_schema().at(index).name; }

MovieStats MovieStatsTable::lookup(const std::string& movie_id) const {
  auto it = movies.find(movie_id);
  if (it != movies.end()) return it->second;
  return MovieStats{movie_id, 0, global_mean_rating};
}

std::map<std::string, MovieStats> compute_movie_stats(const Dataset& d) {
  std::map<std::string, MovieStats> stats;
  std::map<std::string, double> sums;
  for (const auto& i : d.interactions) {
    auto& s = stats[i.movie_id];
    s.movie_id = i.movie_id;
    ++s.tweet_count;
    sums[i.movie_id] += i.rating;
  }
  for (auto& [id, s] : stats) s.mean_rating = sums[id] / static_cast<double>(s.tweet_count);
  return stats;
}

MovieStatsTable compute_movie_stats_table(const Dataset& d) {
  MovieStatsTable table;
  table.movies = compute_movie_stats(d);
  double total = 0.0;
  for (const auto& i : d.interactions) total += i.rating;
  table.global_mean_rating =
      d.interactions.empty() ? 0.0 : total / static_cast<double>(d.interactions.size());
  return table;
}

std::map<std::string, UserAggregates> compute_user_aggregates(const Dataset& d) {
  std::map<std::string, UserAggregates> out;
  std::map<std::string, double> sums;
  for (const auto& i : d.interactions) {
    ++out[i.user_id].imdb_tweets;
    sums[i.user_id] += i.rating;
  }
  for (auto& [id, a] : out) a.mean_rating = sums[id] / static_cast<double>(a.imdb_tweets);
  return out;
}

bool HolidayCalendar::is_holiday(Timestamp t) const {
  if (dates.empty()) {
    const int wd = to_civil(t).weekday;
    return wd == 5 || wd == 6;
  }
  return dates.count(format_date(t)) > 0;
}

FeatureVector extract(const Interaction& i, const UserProfile& p, const MovieStats& m,
                      const UserAggregates& aux, Timestamp ref_time,
                      const HolidayCalendar& holidays) {
  using namespace feature;
  const double day = static_cast<double>(kSecondsPerDay);
  // Membership age in days, floored at one day so frequencies stay finite.
  const double membership_days =
      std::max(1.0, static_cast<double>(ref_time - p.account_created_at) / day);
  const double followers = static_cast<double>(p.followers);
  const double followees = static_cast<double>(p.followees);
  const CivilTime when = to_civil(i.tweeted_at);

  FeatureVector v;
  auto& f = v.values;
  f[kFollowers] = followers;
  f[kFollowees] = followees;
  f[kTweets] = static_cast<double>(p.statuses);
  f[kImdbTweets] = static_cast<double>(aux.imdb_tweets);
  f[kUserAverageRating] = aux.mean_rating;
  f[kLikedTweets] = static_cast<double>(p.liked_tweets);
  f[kLists] = static_cast<double>(p.lists);
  f[kTweetingFrequency] = static_cast<double>(p.statuses) / membership_days;
  f[kFollowerGainFrequency] = followers / membership_days;
  f[kFollowingFrequency] = followees / membership_days;
  f[kLikeFrequency] = static_cast<double>(p.liked_tweets) / membership_days;
  f[kFollowerRatio] = followers / std::max(1.0, followees);
  f[kFollowerDifference] = followers - followees;
  f[kMovieTweetCount] = static_cast<double>(m.tweet_count);
  f[kMovieAverageRating] = m.mean_rating;
  f[kRate] = i.rating;
  f[kMentionCount] = static_cast<double>(i.mention_count);
  f[kHashtagCount] = static_cast<double>(i.hashtag_count);
  f[kTweetAge] = static_cast<double>(ref_time - i.tweeted_at) / day;
  f[kMembershipAgeAtTweet] = static_cast<double>(i.tweeted_at - p.account_created_at) / day;
  f[kOpinionDifference] = i.rating - m.mean_rating;
  f[kHour] = when.hour;
  f[kDayOfWeek] = when.weekday;
  f[kTimeOfDay] = when.hour / 6;
  f[kHoliday] = holidays.is_holiday(i.tweeted_at) ? 1.0 : 0.0;
  f[kSameLanguage] = i.language == p.default_language ? 1.0 : 0.0;
  f[kEnglish] = i.language == "en" ? 1.0 : 0.0;

  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if (!std::isfinite(f[j])) {
      throw Error(ErrorKind::kNonFiniteFeature,
                  "feature " + std::string(feature_name(j)) + " is not finite for tweet " +
                      i.tweet_id,
                  {{"index", j}, {"feature", feature_name(j)}, {"tweet_id", i.tweet_id}});
    }
  }
  return v;
}

Normalizer fit_normalizer(std::span<const FeatureVector> rows) {
  if (rows.empty()) throw Error(ErrorKind::kEmptyDataset, "cannot fit normalizer on zero rows");
  Normalizer n;
  n.fitted_on = rows.size();
  const double count = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r[j];
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& r : rows) {
      const double d = r[j] - mean;
      ss += d * d;
    }
    n.mean[j] = mean;
    n.stddev[j] = std::sqrt(ss / count);
  }
  return n;
}

FeatureVector apply_normalizer(const Normalizer& n, const FeatureVector& v) {
  FeatureVector out;
  out.schema_version = v.schema_version;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    out[j] = n.stddev[j] > 0.0 ? (v[j] - n.mean[j]) / n.stddev[j] : 0.0;
  }
  return out;
}

FeatureMask FeatureMask::all() {
  FeatureMask m;
  m.selected.fill(true);
  return m;
}

FeatureMask FeatureMask::preset(std::string_view name) {
  if (name == "all") return all();
  if (name == "compact-11") {
    using namespace feature;
    static constexpr std::array<std::size_t, 11> kRetained = {
        kFollowers, kTweets, kImdbTweets, kFollowerDifference, kMovieAverageRating, kRate,
        kMentionCount, kOpinionDifference, kHoliday, kSameLanguage, kEnglish};
    return from_indices(kRetained);
  }
  throw Error(ErrorKind::kInvalidConfig, "unknown feature mask preset '" + std::string(name) + "'",
              {{"preset", name}});
}

FeatureMask FeatureMask::from_indices(std::span<const std::size_t> indices) {
  FeatureMask m;
  for (std::size_t i : indices) {
    if (i >= kNumFeatures) {
      throw Error(ErrorKind::kInvalidConfig, "feature index out of range",
                  {{"index", i}});
    }
    m.selected[i] = true;
  }
  return m;
}

std::size_t FeatureMask::count() const {
  return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), true));
}

std::vector<std::size_t> FeatureMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (selected[i]) out.push_back(i);
  }
  return out;
}

void FeatureMask::validate() const {
  if (count() == 0) throw Error(ErrorKind::kInvalidConfig, "feature mask selects nothing");
}

}  // namespace engrank
