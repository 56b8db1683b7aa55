#include "engrank/ranking.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "engrank/error.hpp"
#include "engrank/scorer.hpp"

namespace engrank {

double Scorer::score(std::span<const double> x) const {
  if (x.size() != num_features()) {
    throw Error(ErrorKind::kSchemaMismatch,
                "model expects " + std::to_string(num_features()) + " features, got " +
                    std::to_string(x.size()),
                {{"expected", num_features()}, {"got", x.size()}});
  }
  return score_row(x);
}

Eigen::VectorXd Scorer::score_matrix(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != num_features()) {
    throw Error(ErrorKind::kSchemaMismatch,
                "model expects " + std::to_string(num_features()) + " features, got " +
                    std::to_string(rows.cols()),
                {{"expected", num_features()}, {"got", rows.cols()}});
  }
  Eigen::VectorXd out(rows.rows());
  std::vector<double> buf(static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) buf[static_cast<std::size_t>(c)] = rows(r, c);
    out(r) = score_row(buf);
  }
  return out;
}

Ranking rank_by_scores(const std::string& user_id, std::span<const std::string> ids,
                       std::span<const double> scores) {
  if (ids.size() != scores.size()) {
    throw Error(ErrorKind::kSchemaMismatch, "ids and scores differ in length");
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  Ranking r;
  r.user_id = user_id;
  r.ordered_ids.reserve(ids.size());
  r.scores.reserve(ids.size());
  for (std::size_t i : order) {
    r.ordered_ids.push_back(ids[i]);
    r.scores.push_back(scores[i]);
  }
  return r;
}

void write_rankings(std::ostream& out, const RankingSet& rankings, bool with_scores) {
  for (const auto& [user, r] : rankings) {
    nlohmann::json o = {{"user_id", r.user_id}, {"ranking", r.ordered_ids}};
    if (with_scores && !r.scores.empty()) o["scores"] = r.scores;
    out << o.dump() << '\n';
  }
}

RankingSet read_rankings(std::istream& in, const std::string& source) {
  RankingSet out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& field, const std::string& reason) {
      throw Error(ErrorKind::kSchemaViolation,
                  source + ":" + std::to_string(line_no) + ": " + field + ": " + reason,
                  {{"source", source}, {"line_no", line_no}, {"field", field}, {"reason", reason}});
    };
    nlohmann::json o;
    try {
      o = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail("<record>", e.what());
    }
    if (!o.is_object() || !o.contains("user_id")) fail("user_id", "missing");
    if (!o.contains("ranking") || !o["ranking"].is_array()) fail("ranking", "missing");
    Ranking r;
    r.user_id = o["user_id"].is_string() ? o["user_id"].get<std::string>() : o["user_id"].dump();
    for (const auto& id : o["ranking"]) {
      r.ordered_ids.push_back(id.is_string() ? id.get<std::string>() : id.dump());
    }
    if (o.contains("scores") && !o["scores"].is_null()) {
      r.scores = o["scores"].get<std::vector<double>>();
      if (r.scores.size() != r.ordered_ids.size()) fail("scores", "length differs from ranking");
    }
    if (!out.emplace(r.user_id, r).second) fail("user_id", "duplicate user " + r.user_id);
  }
  return out;
}

RankingSet read_rankings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string(), {{"path", path.string()}});
  return read_rankings(in, path.string());
}

}  // namespace engrank
