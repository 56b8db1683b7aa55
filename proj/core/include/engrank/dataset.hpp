#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "engrank/rng.hpp"
#include "engrank/timeutil.hpp"

namespace engrank {

struct UserProfile {
  std::string user_id;
  std::int64_t followers = 0;
  std::int64_t followees = 0;
  std::int64_t statuses = 0;
  std::int64_t liked_tweets = 0;
  std::int64_t lists = 0;
  Timestamp account_created_at = 0;
  std::string default_language;

  bool operator==(const UserProfile&) const = default;
};

// One rating tweet. `engagement` is retweets + favorites.
struct Interaction {
  std::string tweet_id;
  std::string user_id;
  std::string movie_id;
  int rating = 1;
  Timestamp tweeted_at = 0;
  std::string language;
  std::int64_t mention_count = 0;
  std::int64_t hashtag_count = 0;
  std::int64_t engagement = 0;

  bool operator==(const Interaction&) const = default;
};

// Immutable after construction; safe to share across readers.
struct Dataset {
  std::vector<Interaction> interactions;
  std::map<std::string, UserProfile> profiles;
  Timestamp reference_time = 0;

  std::vector<std::string> user_ids() const;
  // Interactions (and profiles) restricted to the given users.
  Dataset subset(const std::set<std::string>& users) const;

  bool operator==(const Dataset&) const = default;
};

enum class DataFormat { kAuto, kCsv, kJsonl };

struct LoadOptions {
  DataFormat format = DataFormat::kAuto;
  DataFormat profiles_format = DataFormat::kAuto;
  // Defaults to the latest tweeted_at when unset.
  std::optional<Timestamp> reference_time;
};

// Throws Error{MissingProfile | SchemaViolation | EmptyDataset | Io}.
Dataset load_interactions(const std::filesystem::path& interactions,
                          const std::filesystem::path& profiles,
                          const LoadOptions& options = {});

// Stream variants used by the file loader; `source` names the stream in
// error details.
std::vector<Interaction> read_interactions(std::istream& in, DataFormat format,
                                           const std::string& source = "<stream>");
std::vector<UserProfile> read_profiles(std::istream& in, DataFormat format,
                                       const std::string& source = "<stream>");

// Validates cross-record invariants and assembles the dataset.
Dataset assemble_dataset(std::vector<Interaction> interactions,
                         const std::vector<UserProfile>& profiles,
                         std::optional<Timestamp> reference_time = std::nullopt);

void write_interactions(std::ostream& out, const std::vector<Interaction>& rows,
                        DataFormat format = DataFormat::kCsv);
void write_profiles(std::ostream& out, const std::map<std::string, UserProfile>& profiles,
                    DataFormat format = DataFormat::kCsv);

inline constexpr const char* kInteractionsHeader =
    "tweet_id,user_id,movie_id,rating,tweeted_at,language,mention_count,"
    "hashtag_count,engagement";
inline constexpr const char* kProfilesHeader =
    "user_id,followers,followees,statuses,liked_tweets,lists,account_created_at,"
    "default_language";

struct FoldPlan {
  int k = 0;
  std::map<std::string, int> assignment;
  Seed seed = 0;

  // Users of each fold in id order.
  std::vector<std::vector<std::string>> folds() const;
  std::set<std::string> fold_users(int fold) const;
  std::set<std::string> users_outside(int fold) const;
};

// User-grouped k-fold partition; fold sizes differ by at most one user.
// Throws Error{TooFewUsers | InvalidConfig}.
FoldPlan split_folds(const Dataset& d, int k, Seed seed);
FoldPlan split_user_folds(std::vector<std::string> users, int k, Seed seed);

// Within each group: tweeted_at ascending, ties by tweet_id.
std::map<std::string, std::vector<Interaction>> group_by_user(const Dataset& d);

enum class PlantedUtility { kLinear, kQuadratic };

struct SynthConfig {
  int users = 100;
  int tweets_per_user = 8;
  int movies = 40;
  // Rate of additive Poisson noise on the engagement label; 0 disables it.
  double noise = 0.0;
  PlantedUtility utility = PlantedUtility::kLinear;
};

// Planted label model over canonical feature slots:
//   engagement = round(softplus(bias + sum_j linear[j] * f_j
//                               + sum_j quadratic[j] * (f_j - center[j])^2))
//                + Poisson(noise)
// Only raw (unnormalized) features that are read directly off the
// interaction and profile carry nonzero coefficients: followers (0), rate
// (15), mention count (16), hashtag count (17), same language (25) and
// English (26).
struct PlantedModel {
  static constexpr std::size_t kSlots = 27;
  double bias = 0.0;
  std::array<double, kSlots> linear{};
  std::array<double, kSlots> quadratic{};
  std::array<double, kSlots> center{};
  double noise = 0.0;

  double utility(const std::array<double, kSlots>& raw_features) const;
  // Noise-free label: round(softplus(utility)).
  std::int64_t label(const std::array<double, kSlots>& raw_features) const;
};

struct SynthResult {
  Dataset dataset;
  PlantedModel planted;
};

// Throws Error{InvalidConfig}.
SynthResult generate_synthetic(const SynthConfig& cfg, Seed seed);

double softplus(double x);

}  // namespace engrank
