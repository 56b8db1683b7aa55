#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "engrank/dataset.hpp"

namespace engrank {

inline constexpr std::size_t kNumFeatures = 27;
inline constexpr int kFeatureSchemaVersion = 1;

enum class FeatureCategory { kUser, kMovie, kTweet };
enum class FeatureType { kNumerical, kCategorical, kBoolean };

struct FeatureInfo {
  std::string_view name;
  FeatureCategory category;
  FeatureType type;
};

// Canonical slot order: 13 user-based, 2 movie-based, 12 tweet-based.
namespace feature {
enum Index : std::size_t {
  kFollowers = 0,
  kFollowees,
  kTweets,
  kImdbTweets,
  kUserAverageRating,
  kLikedTweets,
  kLists,
  kTweetingFrequency,
  kFollowerGainFrequency,
  kFollowingFrequency,
  kLikeFrequency,
  kFollowerRatio,
  kFollowerDifference,
  kMovieTweetCount,
  kMovieAverageRating,
  kRate,
  kMentionCount,
  kHashtagCount,
  kTweetAge,
  kMembershipAgeAtTweet,
  kOpinionDifference,
  kHour,
  kDayOfWeek,
  kTimeOfDay,
  kHoliday,
  kSameLanguage,
  kEnglish,
};
}  // namespace feature

const std::array<FeatureInfo, kNumFeatures>& feature_schema();
std::string_view feature_name(std::size_t index);

struct FeatureVector {
  std::array<double, kNumFeatures> values{};
  int schema_version = kFeatureSchemaVersion;

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  bool operator==(const FeatureVector&) const = default;
};

struct MovieStats {
  std::string movie_id;
  std::int64_t tweet_count = 0;
  double mean_rating = 0.0;
};

// Movie statistics plus the fallback used for movies absent from the
// interactions the table was computed on (count 0, global mean rating).
struct MovieStatsTable {
  std::map<std::string, MovieStats> movies;
  double global_mean_rating = 0.0;

  MovieStats lookup(const std::string& movie_id) const;
};

struct UserAggregates {
  std::int64_t imdb_tweets = 0;
  double mean_rating = 0.0;
};

// Callers pass the training slice; statistics never see held-out rows.
std::map<std::string, MovieStats> compute_movie_stats(const Dataset& d);
MovieStatsTable compute_movie_stats_table(const Dataset& d);
std::map<std::string, UserAggregates> compute_user_aggregates(const Dataset& d);

// Explicit date list (`YYYY-MM-DD`, UTC). Empty means Saturdays and Sundays.
struct HolidayCalendar {
  std::set<std::string> dates;

  bool is_holiday(Timestamp t) const;
};

// Pure. Throws Error{NonFiniteFeature} if any slot is not finite.
FeatureVector extract(const Interaction& i, const UserProfile& p, const MovieStats& m,
                      const UserAggregates& aux, Timestamp ref_time,
                      const HolidayCalendar& holidays = {});

struct Normalizer {
  std::array<double, kNumFeatures> mean{};
  std::array<double, kNumFeatures> stddev{};
  std::size_t fitted_on = 0;
};

// Population standard deviation. Throws Error{EmptyDataset} on no rows.
Normalizer fit_normalizer(std::span<const FeatureVector> rows);
// (x - mean) / std per slot; slots with std == 0 map to 0.
FeatureVector apply_normalizer(const Normalizer& n, const FeatureVector& v);

struct FeatureMask {
  std::array<bool, kNumFeatures> selected{};

  static FeatureMask all();
  // "all" or "compact-11" (the eleven retained features: followers, tweets,
  // IMDb tweets, followers-followees, movie average rating, rate, mention
  // count, opinion difference and the three boolean flags).
  // Throws Error{InvalidConfig} for unknown names.
  static FeatureMask preset(std::string_view name);
  static FeatureMask from_indices(std::span<const std::size_t> indices);

  std::size_t count() const;
  std::vector<std::size_t> indices() const;
  // Throws Error{InvalidConfig} when no slot is selected.
  void validate() const;

  bool operator==(const FeatureMask&) const = default;
};

}  // namespace engrank
