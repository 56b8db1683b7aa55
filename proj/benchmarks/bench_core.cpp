#include <benchmark/benchmark.h>

#include "engrank/aggregation.hpp"
#include "engrank/dataset.hpp"
#include "engrank/feature_table.hpp"
#include "engrank/metrics.hpp"
#include "engrank/models.hpp"

using namespace engrank;

namespace {

std::vector<std::string> ids(std::size_t m) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < m; ++i) v.push_back("t" + std::to_string(1000 + i));
  return v;
}

Ranking shuffled(Rng& rng, std::size_t m) {
  Ranking r;
  r.user_id = "u";
  r.ordered_ids = ids(m);
  rng.shuffle(r.ordered_ids);
  return r;
}

WeightedRankerSet ranker_set(std::size_t m, std::size_t n) {
  Rng rng(7);
  WeightedRankerSet s;
  for (std::size_t i = 0; i < n; ++i) {
    s.names.push_back("r" + std::to_string(i));
    s.outputs.push_back({{"u", shuffled(rng, m)}});
    s.weights.push_back(rng.uniform(0.1, 1.0));
  }
  return s;
}

const FeatureTable& synthetic_table() {
  static const FeatureTable table = [] {
    SynthConfig sc;
    sc.users = 100;
    sc.tweets_per_user = 8;
    const auto syn = generate_synthetic(sc, 3);
    return featurize(syn.dataset, fit_feature_context(syn.dataset, {}));
  }();
  return table;
}

}  // namespace

static void BM_KendallTau(benchmark::State& state) {
  Rng rng(1);
  const auto m = static_cast<std::size_t>(state.range(0));
  const Ranking a = shuffled(rng, m), b = shuffled(rng, m);
  for (auto _ : state) benchmark::DoNotOptimize(kendall_tau(a, b));
}
BENCHMARK(BM_KendallTau)->Arg(10)->Arg(100)->Arg(1000);

static void BM_KemenyExact(benchmark::State& state) {
  const auto set = ranker_set(static_cast<std::size_t>(state.range(0)), 6);
  const AggregateOptions opts{.exact_threshold = 16};
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(set, "u", opts).cost);
}
BENCHMARK(BM_KemenyExact)->DenseRange(6, 12, 2);

static void BM_KemenyHeuristic(benchmark::State& state) {
  const auto set = ranker_set(static_cast<std::size_t>(state.range(0)), 6);
  const AggregateOptions opts{.force_heuristic = true};
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(set, "u", opts).cost);
}
BENCHMARK(BM_KemenyHeuristic)->Arg(8)->Arg(32)->Arg(128);

static void BM_Borda(benchmark::State& state) {
  const auto set = ranker_set(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(borda(set, "u").size());
}
BENCHMARK(BM_Borda)->Arg(8)->Arg(128);

static void BM_Ndcg(benchmark::State& state) {
  Rng rng(2);
  const auto m = static_cast<std::size_t>(state.range(0));
  std::vector<double> scores(m), labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    scores[i] = rng.normal();
    labels[i] = static_cast<double>(rng.index(5));
  }
  const auto names = ids(m);
  for (auto _ : state) benchmark::DoNotOptimize(ndcg_of_scores(scores, labels, names));
}
BENCHMARK(BM_Ndcg)->Arg(8)->Arg(64)->Arg(512);

static void BM_Train(benchmark::State& state, const char* model, nlohmann::json params) {
  const auto& table = synthetic_table();
  for (auto _ : state) {
    const auto m = train_model(model, params, table, FeatureMask::all());
    benchmark::DoNotOptimize(m.scorer.get());
  }
}
BENCHMARK_CAPTURE(BM_Train, sgdr, "sgdr", nlohmann::json{{"epochs", 20}})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, bayridge, "bayridge", nlohmann::json::object())->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, xtrees, "xtrees", nlohmann::json{{"n_trees", 20}})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, listnet, "listnet", nlohmann::json{{"epochs", 20}})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, ranksvm, "ranksvm", nlohmann::json{{"epochs", 20}})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, adarank, "adarank", nlohmann::json{{"rounds", 10}})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, ranknet, "ranknet", nlohmann::json{{"epochs", 10}})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, lambdarank, "lambdarank", nlohmann::json{{"epochs", 10}})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, listmle, "listmle", nlohmann::json{{"epochs", 20}})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
