#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace engrank {

// One user's items, best first. `scores` is optional and, when present,
// aligned with `ordered_ids`.
struct Ranking {
  std::string user_id;
  std::vector<std::string> ordered_ids;
  std::vector<double> scores;

  std::size_t size() const { return ordered_ids.size(); }
  bool operator==(const Ranking&) const = default;
};

// Sorts by score descending, ties by id ascending.
Ranking rank_by_scores(const std::string& user_id, std::span<const std::string> ids,
                       std::span<const double> scores);

using RankingSet = std::map<std::string, Ranking>;

// JSON-lines: {"user_id": ..., "ranking": [...], "scores": [...]}, one user
// per line, users in id order.
void write_rankings(std::ostream& out, const RankingSet& rankings, bool with_scores = true);
RankingSet read_rankings(std::istream& in, const std::string& source = "<stream>");
RankingSet read_rankings(const std::filesystem::path& path);

}  // namespace engrank
