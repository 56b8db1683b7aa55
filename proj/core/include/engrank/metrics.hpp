#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "engrank/ranking.hpp"

namespace engrank {

enum class GainMode { kLinear, kExponential };
// NDCG of a list whose ideal DCG is zero: 1.0 (kOne) or 0.0 (kZero).
enum class ZeroIdcgRule { kOne, kZero };

struct NdcgOptions {
  int k = 10;
  GainMode gain = GainMode::kLinear;
  ZeroIdcgRule zero_idcg = ZeroIdcgRule::kOne;
};

double gain(double label, GainMode mode);
// Discount of the 0-based rank r: 1 / log2(r + 2).
double discount(std::size_t rank);

// DCG@k of labels listed in ranked order.
double dcg_at_k(std::span<const double> ranked_labels, int k, GainMode mode);
// DCG@k of the label-descending arrangement.
double ideal_dcg_at_k(std::span<const double> labels, int k, GainMode mode);
// NDCG@k of labels listed in ranked order.
double ndcg_of_ranked_labels(std::span<const double> ranked_labels, const NdcgOptions& opts);

// Throws Error{MissingLabel}.
double ndcg_at_k(const Ranking& ranking, const std::map<std::string, double>& labels,
                 const NdcgOptions& opts = {});

// NDCG of ordering items by score (descending, ties by id ascending).
double ndcg_of_scores(std::span<const double> scores, std::span<const double> labels,
                      std::span<const std::string> ids, const NdcgOptions& opts = {});

struct MetricReport {
  std::map<std::string, double> per_user;
  double mean = 0.0;
  int k = 10;
};

// Throws Error{EmptyDataset | MissingLabel}.
MetricReport mean_ndcg(const RankingSet& rankings, const std::map<std::string, double>& labels,
                       const NdcgOptions& opts = {});

nlohmann::json report_to_json(const MetricReport& report,
                              const nlohmann::json& fingerprint = nlohmann::json::object());
// `user_id,ndcg` rows followed by a `__mean__` row.
void write_report_csv(std::ostream& out, const MetricReport& report);

std::string gain_mode_name(GainMode mode);
GainMode parse_gain_mode(const std::string& name);
std::string zero_idcg_name(ZeroIdcgRule rule);
ZeroIdcgRule parse_zero_idcg(const std::string& name);

}  // namespace engrank
