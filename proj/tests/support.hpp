#pragma once

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <unistd.h>

#include <Eigen/Dense>

#include "engrank/dataset.hpp"
#include "engrank/feature_table.hpp"
#include "engrank/ltr.hpp"
#include "engrank/rng.hpp"

namespace engrank::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("engrank-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Central differences of f around x.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        Eigen::VectorXd x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-8});
}

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

// Random group with integer labels in [0, max_label]; ids t0, t1, ...
inline QueryGroup random_group(Rng& rng, std::size_t rows, std::size_t dims, int max_label = 4,
                               const std::string& user = "u") {
  QueryGroup g;
  g.user_id = user;
  g.features = random_matrix(rng, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < rows; ++i) {
    g.labels.push_back(static_cast<double>(rng.index(static_cast<std::uint64_t>(max_label) + 1)));
    g.tweet_ids.push_back("t" + std::to_string(i));
  }
  return g;
}

inline UserProfile profile(const std::string& id, Timestamp created, std::int64_t followers = 10,
                           std::int64_t followees = 5, const std::string& lang = "en") {
  UserProfile p;
  p.user_id = id;
  p.followers = followers;
  p.followees = followees;
  p.statuses = 100;
  p.liked_tweets = 20;
  p.lists = 1;
  p.account_created_at = created;
  p.default_language = lang;
  return p;
}

inline Interaction interaction(const std::string& tweet, const std::string& user,
                               const std::string& movie, int rating, Timestamp at,
                               std::int64_t engagement, const std::string& lang = "en") {
  Interaction i;
  i.tweet_id = tweet;
  i.user_id = user;
  i.movie_id = movie;
  i.rating = rating;
  i.tweeted_at = at;
  i.language = lang;
  i.engagement = engagement;
  return i;
}

// Table with `users` users of `per_user` rows each. `fill(row, features)`
// writes the 27 feature slots of a row and returns its label.
inline FeatureTable make_table(int users, int per_user,
                               const std::function<double(std::size_t, Eigen::Ref<Eigen::RowVectorXd>)>& fill) {
  FeatureTable t;
  const auto rows = static_cast<std::size_t>(users * per_user);
  t.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(kNumFeatures));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t u = r / static_cast<std::size_t>(per_user);
    char uid[32], tid[32];
    std::snprintf(uid, sizeof uid, "u%04zu", u);
    std::snprintf(tid, sizeof tid, "t%06zu", r);
    t.user_ids.push_back(uid);
    t.tweet_ids.push_back(tid);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(kNumFeatures));
    t.labels.push_back(fill(r, row));
    t.features.row(static_cast<Eigen::Index>(r)) = row;
  }
  return t;
}

}  // namespace engrank::test
