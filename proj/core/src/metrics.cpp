#include "engrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>

#include "engrank/error.hpp"

namespace engrank {
namespace {

void check_k(int k) {
  if (k < 1) throw Error(ErrorKind::kInvalidConfig, "NDCG cutoff must be >= 1", {{"k", k}});
}

}  // namespace

double gain(double label, GainMode mode) {
  return mode == GainMode::kLinear ? label : std::exp2(label) - 1.0;
}

double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 2.0); }

double dcg_at_k(std::span<const double> ranked_labels, int k, GainMode mode) {
  check_k(k);
  const std::size_t n = std::min(ranked_labels.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t r = 0; r < n; ++r) dcg += gain(ranked_labels[r], mode) * discount(r);
  return dcg;
}

double ideal_dcg_at_k(std::span<const double> labels, int k, GainMode mode) {
  std::vector<double> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return dcg_at_k(sorted, k, mode);
}

double ndcg_of_ranked_labels(std::span<const double> ranked_labels, const NdcgOptions& opts) {
  const double idcg = ideal_dcg_at_k(ranked_labels, opts.k, opts.gain);
  if (idcg == 0.0) return opts.zero_idcg == ZeroIdcgRule::kOne ? 1.0 : 0.0;
  return dcg_at_k(ranked_labels, opts.k, opts.gain) / idcg;
}

double ndcg_at_k(const Ranking& ranking, const std::map<std::string, double>& labels,
                 const NdcgOptions& opts) {
  std::vector<double> ranked;
  ranked.reserve(ranking.size());
  for (const auto& id : ranking.ordered_ids) {
    auto it = labels.find(id);
    if (it == labels.end()) {
      throw Error(ErrorKind::kMissingLabel, "no label for tweet " + id,
                  {{"tweet_id", id}, {"user_id", ranking.user_id}});
    }
    ranked.push_back(it->second);
  }
  return ndcg_of_ranked_labels(ranked, opts);
}

double ndcg_of_scores(std::span<const double> scores, std::span<const double> labels,
                      std::span<const std::string> ids, const NdcgOptions& opts) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  std::vector<double> ranked;
  ranked.reserve(order.size());
  for (std::size_t i : order) ranked.push_back(labels[i]);
  return ndcg_of_ranked_labels(ranked, opts);
}

MetricReport mean_ndcg(const RankingSet& rankings, const std::map<std::string, double>& labels,
                       const NdcgOptions& opts) {
  if (rankings.empty()) throw Error(ErrorKind::kEmptyDataset, "no rankings to evaluate");
  MetricReport report;
  report.k = opts.k;
  double sum = 0.0;
  for (const auto& [user, r] : rankings) {
    const double v = ndcg_at_k(r, labels, opts);
    report.per_user[user] = v;
    sum += v;
  }
  report.mean = sum / static_cast<double>(rankings.size());
  return report;
}

nlohmann::json report_to_json(const MetricReport& report, const nlohmann::json& fingerprint) {
  nlohmann::json j = {{"k", report.k}, {"mean", report.mean}, {"per_user", report.per_user}};
  if (!fingerprint.empty()) j["config"] = fingerprint;
  return j;
}

void write_report_csv(std::ostream& out, const MetricReport& report) {
  out << "user_id,ndcg\n";
  for (const auto& [user, v] : report.per_user) out << user << ',' << nlohmann::json(v).dump() << '\n';
  out << "__mean__," << nlohmann::json(report.mean).dump() << '\n';
}

std::string gain_mode_name(GainMode mode) { return mode == GainMode::kLinear ? "linear" : "exp"; }

GainMode parse_gain_mode(const std::string& name) {
  if (name == "linear") return GainMode::kLinear;
  if (name == "exp") return GainMode::kExponential;
  throw Error(ErrorKind::kInvalidConfig, "gain must be linear or exp", {{"gain", name}});
}

std::string zero_idcg_name(ZeroIdcgRule rule) { return rule == ZeroIdcgRule::kOne ? "one" : "zero"; }

ZeroIdcgRule parse_zero_idcg(const std::string& name) {
  if (name == "one") return ZeroIdcgRule::kOne;
  if (name == "zero") return ZeroIdcgRule::kZero;
  throw Error(ErrorKind::kInvalidConfig, "zero-idcg must be one or zero", {{"zero_idcg", name}});
}

}  // namespace engrank
