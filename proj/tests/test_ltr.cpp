#include <gtest/gtest.h>

#include <numeric>

#include "engrank/error.hpp"
#include "engrank/ltr.hpp"
#include "support.hpp"

using namespace engrank;

namespace {

std::vector<QueryGroup> random_groups(Rng& rng, int count, std::size_t rows, std::size_t dims) {
  std::vector<QueryGroup> gs;
  for (int i = 0; i < count; ++i) gs.push_back(test::random_group(rng, rows, dims, 4, "u" + std::to_string(i)));
  return gs;
}

// Groups whose labels are a monotone function of w_true . x.
std::vector<QueryGroup> planted_groups(Rng& rng, int count, std::size_t rows,
                                       const Eigen::VectorXd& w_true) {
  std::vector<QueryGroup> gs = random_groups(rng, count, rows, static_cast<std::size_t>(w_true.size()));
  for (auto& g : gs) {
    const Eigen::VectorXd s = g.features * w_true;
    for (std::size_t i = 0; i < g.size(); ++i) g.labels[i] = std::clamp(std::round(s[i] + 2.0), 0.0, 4.0);
  }
  return gs;
}

double mean_ndcg_of(const Scorer& m, const std::vector<QueryGroup>& gs) {
  double s = 0;
  for (const auto& g : gs) {
    const Eigen::VectorXd sc = m.score_matrix(g.features);
    s += ndcg_of_scores(std::span<const double>(sc.data(), sc.size()), g.labels, g.tweet_ids);
  }
  return s / static_cast<double>(gs.size());
}

}  // namespace

TEST(QueryGroup, DiscordantPairs) {
  QueryGroup g;
  g.labels = {2, 1, 1, 0};
  EXPECT_EQ(g.discordant_pairs(), 5u);
  g.labels = {3, 3};
  EXPECT_EQ(g.discordant_pairs(), 0u);
}

TEST(RankGroup, TiesBrokenByTweetId) {
  QueryGroup g;
  g.user_id = "u";
  g.features = Eigen::MatrixXd::Zero(3, 1);
  g.features(1, 0) = 1.0;
  g.labels = {0, 0, 0};
  g.tweet_ids = {"t9", "t5", "t1"};
  const LinearRanker m("listnet", Eigen::VectorXd::Ones(1));
  const Ranking r = rank_group(m, g);
  EXPECT_EQ(r.ordered_ids, (std::vector<std::string>{"t5", "t1", "t9"}));
}

TEST(RankGroup, WidthMismatch) {
  Rng rng(1);
  const QueryGroup g = test::random_group(rng, 3, 2);
  const LinearRanker m("listnet", Eigen::VectorXd::Ones(3));
  EXPECT_THROW(rank_group(m, g), Error);
}

TEST(RankGroup, InvariantUnderMonotoneScoreTransform) {
  Rng rng(2);
  const QueryGroup g = test::random_group(rng, 12, 3);
  const Eigen::VectorXd w = test::random_vector(rng, 3);
  const LinearRanker a("listnet", w);
  const LinearRanker b("listnet", 3.0 * w);
  EXPECT_EQ(rank_group(a, g).ordered_ids, rank_group(b, g).ordered_ids);
}

TEST(ListNet, SpecExampleLoss) {
  // Equal scores over labels {1, 0}: -(p log 0.5 + (1-p) log 0.5) = log 2.
  const Eigen::Vector2d s(0.0, 0.0);
  const std::vector<double> labels{1.0, 0.0};
  EXPECT_NEAR(listnet_group_loss(s, labels), std::log(2.0), 1e-12);
  const Eigen::VectorXd g = listnet_score_gradient(s, labels);
  const double p = std::exp(1.0) / (std::exp(1.0) + 1.0);
  EXPECT_NEAR(g[0], 0.5 - p, 1e-12);
  EXPECT_NEAR(g[1], p - 0.5, 1e-12);
}

TEST(ListNet, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto gs = random_groups(rng, 4, 6, 3);
    const ListNetConfig cfg{.temperature = 0.7, .l2 = 0.05};
    const Eigen::VectorXd w = test::random_vector(rng, 3);
    const auto f = [&](const Eigen::VectorXd& x) { return listnet_loss(x, gs, cfg); };
    EXPECT_LT(test::relative_error(listnet_gradient(w, gs, cfg), test::numeric_gradient(f, w)), 1e-5);
  }
}

TEST(ListNet, LearnsPlantedDirection) {
  Rng rng(4);
  const Eigen::Vector3d w_true(1.0, -0.5, 0.0);
  const auto train = planted_groups(rng, 60, 8, w_true);
  const auto test = planted_groups(rng, 30, 8, w_true);
  const auto m = train_listnet(train, {.seed = 1});
  EXPECT_GT(mean_ndcg_of(m, test), 0.95);
  EXPECT_EQ(m.kind(), "listnet");
}

TEST(ListNet, Deterministic) {
  Rng rng(5);
  const auto gs = random_groups(rng, 10, 5, 3);
  EXPECT_EQ(train_listnet(gs, {.epochs = 20, .seed = 3}).weights(),
            train_listnet(gs, {.epochs = 20, .seed = 3}).weights());
}

TEST(RankSvm, HingeExample) {
  // One pair, x_better - x_worse = (1, 0); w = (0.5, 0): hinge 0.5.
  QueryGroup g;
  g.user_id = "u";
  g.features = Eigen::MatrixXd::Zero(2, 2);
  g.features(0, 0) = 1.0;
  g.labels = {1, 0};
  g.tweet_ids = {"a", "b"};
  const RankSvmConfig cfg{.c = 2.0};
  const Eigen::Vector2d w(0.5, 0.0);
  EXPECT_NEAR(ranksvm_objective(w, {g}, cfg), 0.25 / 4.0 + 0.5, 1e-12);
}

TEST(RankSvm, GradientMatchesFiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto gs = random_groups(rng, 4, 6, 3);
    const RankSvmConfig cfg{.c = 3.0};
    const Eigen::VectorXd w = 0.1 * test::random_vector(rng, 3);
    const auto f = [&](const Eigen::VectorXd& x) { return ranksvm_objective(x, gs, cfg); };
    // Hinge kinks have measure zero; random points avoid them.
    EXPECT_LT(test::relative_error(ranksvm_gradient(w, gs, cfg), test::numeric_gradient(f, w)), 1e-5);
  }
}

TEST(RankSvm, LearnsPlantedDirection) {
  Rng rng(7);
  const Eigen::Vector3d w_true(0.0, 1.0, 1.0);
  const auto train = planted_groups(rng, 60, 8, w_true);
  const auto test = planted_groups(rng, 30, 8, w_true);
  EXPECT_GT(mean_ndcg_of(train_ranking_svm(train, {.seed = 2}), test), 0.95);
}

TEST(ListMle, PermutationOrder) {
  const std::vector<double> labels{1, 3, 1, 0};
  const std::vector<std::string> ids{"d", "a", "b", "c"};
  EXPECT_EQ(listmle_permutation(labels, ids), (std::vector<std::size_t>{1, 2, 0, 3}));
}

TEST(ListMle, TwoItemLoss) {
  const Eigen::Vector2d s(1.0, 0.0);
  const std::vector<double> labels{1, 0};
  const std::vector<std::string> ids{"a", "b"};
  // -log(e^1 / (e^1 + e^0)).
  EXPECT_NEAR(listmle_group_loss(s, labels, ids), std::log1p(std::exp(-1.0)), 1e-12);
}

TEST(ListMle, ScoreGradientMatchesFiniteDifferences) {
  Rng rng(8);
  const QueryGroup g = test::random_group(rng, 7, 1);
  const Eigen::VectorXd s = test::random_vector(rng, 7);
  const auto f = [&](const Eigen::VectorXd& x) { return listmle_group_loss(x, g.labels, g.tweet_ids); };
  EXPECT_LT(test::relative_error(listmle_score_gradient(s, g.labels, g.tweet_ids), test::numeric_gradient(f, s)), 1e-6);
}

TEST(ListMle, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto gs = random_groups(rng, 4, 6, 3);
    const ListMleConfig cfg{.l2 = 0.02};
    const Eigen::VectorXd w = test::random_vector(rng, 3);
    const auto f = [&](const Eigen::VectorXd& x) { return listmle_loss(x, gs, cfg); };
    EXPECT_LT(test::relative_error(listmle_gradient(w, gs, cfg), test::numeric_gradient(f, w)), 1e-5);
  }
}

TEST(ListMle, LearnsPlantedDirection) {
  Rng rng(10);
  const Eigen::Vector3d w_true(-1.0, 0.0, 0.7);
  const auto train = planted_groups(rng, 60, 8, w_true);
  const auto test = planted_groups(rng, 30, 8, w_true);
  EXPECT_GT(mean_ndcg_of(train_listmle(train, {.seed = 3}), test), 0.95);
}

TEST(AdaRank, PerfectFeatureGetsChosen) {
  Rng rng(11);
  auto gs = random_groups(rng, 20, 6, 3);
  for (auto& g : gs) {
    for (std::size_t i = 0; i < g.size(); ++i) g.features(static_cast<Eigen::Index>(i), 2) = -g.labels[i];
  }
  const auto m = train_adarank(gs, {.rounds = 5});
  ASSERT_EQ(m.rounds().size(), 1u);
  EXPECT_EQ(m.rounds()[0].feature, 2u);
  EXPECT_EQ(m.rounds()[0].direction, -1);
  EXPECT_NEAR(mean_ndcg_of(m, gs), 1.0, 1e-12);
}

TEST(AdaRank, AllTiedLabelsHaveNoUsefulRanker) {
  Rng rng(12);
  auto gs = random_groups(rng, 5, 4, 2);
  for (auto& g : gs) std::fill(g.labels.begin(), g.labels.end(), 1.0);
  try {
    train_adarank(gs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoUsefulWeakRanker);
  }
}

TEST(AdaRank, PlantedFeature) {
  Rng rng(13);
  const Eigen::Vector4d w_true(0.0, 0.0, 1.5, 0.0);
  const auto train = planted_groups(rng, 50, 8, w_true);
  const auto test = planted_groups(rng, 30, 8, w_true);
  const auto m = train_adarank(train, {.rounds = 10});
  EXPECT_EQ(m.rounds()[0].feature, 2u);
  EXPECT_GT(mean_ndcg_of(m, test), 0.95);
}

TEST(Neural, ZeroOutputInitGivesConstantScores) {
  const auto net = NeuralRanker::initialize("ranknet", 4, 6, 1);
  Rng rng(14);
  const Eigen::MatrixXd X = test::random_matrix(rng, 5, 4);
  EXPECT_EQ(net.forward(X), Eigen::VectorXd::Zero(5));
  EXPECT_EQ(net.parameter_count(), 4u * 6 + 6 + 6 + 1);
  const auto w1 = net.parameters().head(24);
  EXPECT_LE(w1.cwiseAbs().maxCoeff(), 0.5);
}

TEST(Neural, ParameterRoundTrip) {
  auto net = NeuralRanker::initialize("ranknet", 3, 4, 2, true);
  Rng rng(15);
  const Eigen::VectorXd p = test::random_vector(rng, static_cast<Eigen::Index>(net.parameter_count()));
  net.set_parameters(p);
  EXPECT_EQ(net.parameters(), p);
}

TEST(RankNet, GradientMatchesFiniteDifferences) {
  Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    auto net = NeuralRanker::initialize("ranknet", 3, 5, static_cast<Seed>(trial), true);
    const QueryGroup g = test::random_group(rng, 6, 3);
    const auto f = [&](const Eigen::VectorXd& p) {
      NeuralRanker copy = net;
      copy.set_parameters(p);
      return ranknet_group_loss(copy, g);
    };
    EXPECT_LT(test::relative_error(ranknet_group_gradient(net, g), test::numeric_gradient(f, net.parameters())), 1e-5);
  }
}

TEST(RankNet, SinglePairLoss) {
  auto net = NeuralRanker::initialize("ranknet", 1, 1, 0);
  QueryGroup g;
  g.user_id = "u";
  g.features = Eigen::MatrixXd::Zero(2, 1);
  g.labels = {1, 0};
  g.tweet_ids = {"a", "b"};
  EXPECT_NEAR(ranknet_group_loss(net, g), std::log(2.0), 1e-12);
  g.labels = {1, 1};
  EXPECT_EQ(ranknet_group_loss(net, g), 0.0);
}

TEST(RankNet, LearnsNonlinearUtility) {
  Rng rng(17);
  auto make = [&](int count) {
    auto gs = random_groups(rng, count, 8, 2);
    for (auto& g : gs) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.features(static_cast<Eigen::Index>(i), 0);
        g.labels[i] = std::round(4.0 - 2.0 * x * x);
      }
    }
    return gs;
  };
  const auto train = make(80);
  const auto test = make(40);
  EXPECT_GT(mean_ndcg_of(train_ranknet(train, {.epochs = 300, .seed = 4}), test), 0.95);
}

TEST(LambdaRank, CorrectOrderWithEqualLabelsHasNoPairs) {
  const Eigen::Vector3d s(3, 2, 1);
  const std::vector<double> labels{1, 1, 1};
  const std::vector<std::string> ids{"a", "b", "c"};
  EXPECT_TRUE(lambdarank_pairs(s, labels, ids).empty());
  EXPECT_EQ(lambdarank_score_gradient(s, labels, ids), Eigen::VectorXd::Zero(3));
}

TEST(LambdaRank, SinglePairFormula) {
  // Labels {0, 1} with scores {1, 0}: the worse row is ranked first.
  const Eigen::Vector2d s(1.0, 0.0);
  const std::vector<double> labels{0, 1};
  const std::vector<std::string> ids{"a", "b"};
  const auto pairs = lambdarank_pairs(s, labels, ids);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].better, 1u);
  EXPECT_EQ(pairs[0].worse, 0u);
  // Current DCG 1/log2(3), ideal 1: swapping changes NDCG by 1 - 1/log2(3).
  const double delta = 1.0 - 1.0 / std::log2(3.0);
  EXPECT_NEAR(pairs[0].delta_ndcg, delta, 1e-12);
  EXPECT_NEAR(pairs[0].lambda, delta / (1.0 + std::exp(-1.0)), 1e-12);
  const Eigen::VectorXd g = lambdarank_score_gradient(s, labels, ids);
  EXPECT_NEAR(g[0], pairs[0].lambda, 1e-12);
  EXPECT_NEAR(g[1], -pairs[0].lambda, 1e-12);
}

TEST(LambdaRank, LearnsPlantedUtility) {
  Rng rng(18);
  const Eigen::Vector3d w_true(1.0, 0.5, 0.0);
  const auto train = planted_groups(rng, 60, 8, w_true);
  const auto test = planted_groups(rng, 30, 8, w_true);
  const auto m = train_lambdarank(train, {.epochs = 150, .seed = 5});
  EXPECT_GT(mean_ndcg_of(m, test), 0.95);
  EXPECT_EQ(m.kind(), "lambdarank");
}

TEST(Linear, SerializationRoundTrip) {
  Rng rng(19);
  const LinearRanker m("ranksvm", test::random_vector(rng, 4));
  EXPECT_EQ(LinearRanker::from_json("ranksvm", nlohmann::json::parse(m.to_json().dump())).weights(), m.weights());
  const auto net = NeuralRanker::initialize("ranknet", 4, 3, 7, true);
  const Eigen::MatrixXd X = test::random_matrix(rng, 5, 4);
  EXPECT_EQ(NeuralRanker::from_json("ranknet", nlohmann::json::parse(net.to_json().dump())).forward(X), net.forward(X));
  const BoostedRanker b({{1, -1, 0.5}, {0, 1, 0.25}}, 4);
  EXPECT_EQ(BoostedRanker::from_json(b.to_json()).score_matrix(X), b.score_matrix(X));
}

TEST(RankGroup, SortsByScore) {
  QueryGroup g;
  g.user_id = "u";
  g.features = Eigen::Vector3d(0.9, 0.1, 0.5);
  g.labels = {0, 0, 0};
  g.tweet_ids = {"a", "b", "c"};
  const LinearRanker m("listnet", Eigen::VectorXd::Ones(1));
  EXPECT_EQ(rank_group(m, g).ordered_ids, (std::vector<std::string>{"a", "c", "b"}));
}

TEST(ListNet, OrderedScoresBeatUniformLoss) {
  // Scores equal to the labels reproduce the target: the loss is its entropy.
  const Eigen::Vector4d s(3, 2, 1, 0);
  const std::vector<double> labels{3, 2, 1, 0};
  EXPECT_LT(listnet_group_loss(s, labels), std::log(4.0));
}

TEST(RankSvm, SinglePairReachesUnitMargin) {
  QueryGroup g;
  g.user_id = "u";
  g.features = Eigen::MatrixXd(2, 2);
  g.features << 1.0, 0.5, -0.2, 0.3;
  g.labels = {1, 0};
  g.tweet_ids = {"a", "b"};
  const auto m = train_ranking_svm({g}, {.c = 100.0, .epochs = 2000, .lr = 0.05});
  const Eigen::VectorXd diff = g.features.row(0) - g.features.row(1);
  EXPECT_GE(m.weights().dot(diff), 1.0 - 1e-3);
}

TEST(RankSvm, HeldOutPairwiseAccuracy) {
  Rng rng(20);
  const Eigen::Vector3d w_true(0.8, -1.0, 0.3);
  const auto train = planted_groups(rng, 80, 8, w_true);
  const auto test = planted_groups(rng, 40, 8, w_true);
  const auto m = train_ranking_svm(train, {.seed = 6});
  std::size_t pairs = 0, concordant = 0;
  for (const auto& g : test) {
    const Eigen::VectorXd s = m.score_matrix(g.features);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (g.labels[i] <= g.labels[j]) continue;
        ++pairs;
        if (s[static_cast<Eigen::Index>(i)] > s[static_cast<Eigen::Index>(j)]) ++concordant;
      }
    }
  }
  EXPECT_GT(static_cast<double>(concordant) / static_cast<double>(pairs), 0.95);
}

TEST(ListMle, SaturatedLikelihood) {
  const Eigen::Vector2d s(20.0, 0.0);
  const std::vector<double> labels{2, 1};
  const std::vector<std::string> ids{"a", "b"};
  EXPECT_LT(listmle_group_loss(s, labels, ids), 1e-3);
}

TEST(LambdaRank, PairsBelowCutoffWithEqualGainsHaveZeroLambda) {
  // 12 items; rows 10 and 11 sit below rank 10 and share gains with nothing
  // above the cutoff, so swapping them leaves NDCG@10 unchanged.
  Eigen::VectorXd s(12);
  std::vector<double> labels(12, 2.0);
  std::vector<std::string> ids;
  for (int i = 0; i < 12; ++i) {
    s[i] = 12.0 - i;
    ids.push_back("t" + std::string(i < 10 ? "0" : "") + std::to_string(i));
  }
  labels[10] = 0.0;
  labels[11] = 1.0;
  bool seen = false;
  for (const auto& p : lambdarank_pairs(s, labels, ids)) {
    if (p.better == 11 && p.worse == 10) {
      seen = true;
      EXPECT_EQ(p.delta_ndcg, 0.0);
      EXPECT_EQ(p.lambda, 0.0);
    }
  }
  EXPECT_TRUE(seen);
}

TEST(LambdaRank, MatchesRankNetOnPlantedUtility) {
  Rng rng(21);
  const Eigen::Vector3d w_true(0.6, -0.8, 0.4);
  const auto train = planted_groups(rng, 80, 8, w_true);
  const auto test = planted_groups(rng, 40, 8, w_true);
  const NeuralRankConfig cfg{.epochs = 150, .seed = 8};
  EXPECT_GE(mean_ndcg_of(train_lambdarank(train, cfg), test),
            mean_ndcg_of(train_ranknet(train, cfg), test) - 0.01);
}
