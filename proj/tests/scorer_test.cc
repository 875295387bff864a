#include "genret/scorer.h"

#include <gtest/gtest.h>

#include <cmath>

#include "genret/rng.h"
#include "test_util.h"

namespace genret {
namespace {

FeatureConfig small_features(std::size_t f = 1024) {
  FeatureConfig c;
  c.feature_dim = f;
  c.positions = 8;
  c.seed = 3;
  return c;
}

void randomize(LinearScorer& s, std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (auto& w : s.weights()) w = scale * rng.normal();
}

TokenSequence random_text(Rng& rng, std::size_t max_len) {
  TokenSequence t(1 + rng.below(max_len));
  for (auto& w : t) w = "w" + std::to_string(rng.below(30));
  return t;
}

TEST(Features, Deterministic) {
  const TokenSequence q{"a", "b", "c"};
  const std::vector<TokenId> p{4, 2};
  EXPECT_EQ(featurize(q, p, small_features()), featurize(q, p, small_features()));
}

TEST(Features, EmptyInputHasStartAndPositionOnly) {
  const auto c = small_features(1 << 20);
  auto f = featurize({}, {}, c);
  auto expected = prefix_features({}, c);
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(f, expected);
  double total = 0;
  for (const auto& [i, n] : f) total += n;
  EXPECT_EQ(total, 2.0);
}

TEST(Features, WordOrderChangesBigrams) {
  const auto c = small_features(1 << 20);
  EXPECT_NE(input_features({"new", "york", "city"}, c), input_features({"york", "new", "city"}, c));
}

TEST(Features, PositionSaturates) {
  const auto c = small_features(1 << 20);
  std::vector<TokenId> long_a(20, 1), long_b(30, 1);
  EXPECT_EQ(prefix_features(long_a, c), prefix_features(long_b, c));
}

TEST(Scorer, ZeroWeightsUniform) {
  LinearScorer s(small_features(), 7);
  const std::vector<TokenId> prefix{1, 2};
  for (double lp : s.next_logprobs({"x", "y"}, prefix)) EXPECT_EQ(lp, -std::log(7.0));
}

TEST(Scorer, NormalizedForRandomInputs) {
  LinearScorer s(small_features(), 11);
  randomize(s, 1, 2.0);
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TokenId> prefix(rng.below(6));
    for (auto& t : prefix) t = static_cast<TokenId>(rng.below(11));
    auto lp = s.next_logprobs(random_text(rng, 10), prefix);
    double total = 0;
    for (double x : lp) total += std::exp(x);
    ASSERT_NEAR(total, 1.0, 1e-6);
  }
}

TEST(Scorer, ZeroWeightLossIsLenLnV) {
  for (std::size_t v : {2, 5, 17, 6145}) {
    LinearScorer s(small_features(64), v);
    for (std::size_t len = 1; len <= 24; ++len) {
      std::vector<TokenId> target(len, 0);
      const double expected = static_cast<double>(len + 1) * std::log(static_cast<double>(v));
      EXPECT_EQ(s.pair_loss({"q"}, target, static_cast<TokenId>(v - 1), nullptr), expected)
          << "V=" << v << " len=" << len;
    }
  }
}

TEST(Scorer, GradientMatchesFiniteDifferences) {
  Rng rng(17);
  const std::size_t vocab = 9;
  LinearScorer s(small_features(256), vocab);
  randomize(s, 5, 0.3);
  int checked = 0;
  for (int pair = 0; pair < 8; ++pair) {
    const auto input = random_text(rng, 6);
    std::vector<TokenId> target(1 + rng.below(4));
    for (auto& t : target) t = static_cast<TokenId>(rng.below(vocab - 1));
    SparseGradient grad;
    s.pair_loss(input, target, vocab - 1, &grad);
    std::vector<std::uint32_t> rows;
    for (const auto& [row, g] : grad) rows.push_back(row);
    for (int sample = 0; sample < 5; ++sample) {
      const auto row = rows[rng.below(rows.size())];
      const auto col = rng.below(vocab);
      double& w = s.weight(row, col);
      const double saved = w;
      const double h = 1e-5;
      w = saved + h;
      const double up = s.pair_loss(input, target, vocab - 1, nullptr);
      w = saved - h;
      const double down = s.pair_loss(input, target, vocab - 1, nullptr);
      w = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grad.at(row)[col];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      EXPECT_LT(rel, 1e-4) << "row " << row << " col " << col;
      ++checked;
    }
  }
  EXPECT_GE(checked, 20);
}

TEST(Scorer, OneStepRaisesTargetProbability) {
  // Two atomic docids plus the sentinel.
  LinearScorer s(small_features(), 3);
  const TokenSequence q{"where", "is", "doc", "one"};
  const std::vector<TrainingPair> pairs{{q, {0}, "one", Stage::kSupervised}};
  const double before = s.next_logprobs(q, {})[0];
  train(s, pairs, 2, {1, {}, 0});
  EXPECT_GT(s.next_logprobs(q, {})[0], before);
}

TEST(Scorer, MemorizesSinglePair) {
  LinearScorer s(small_features(), 12);
  const std::vector<TrainingPair> pairs{{{"a", "b", "c"}, {3, 7, 1}, "k", Stage::kSupervised}};
  TrainConfig config;
  config.epochs = 400;
  config.adamw.lr = 0.05;
  auto trace = train(s, pairs, 11, config);
  EXPECT_NEAR(trace.front(), 4 * std::log(12.0), 1e-12);
  EXPECT_LT(s.pair_loss(pairs[0].input, pairs[0].target, 11, nullptr), 0.1);
  EXPECT_LT(trace.back(), trace.front());
}

TEST(Scorer, TrainingDeterministic) {
  Rng rng(4);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 30; ++i) {
    pairs.push_back({random_text(rng, 5), {TokenId(rng.below(5)), TokenId(rng.below(5))}, "k",
                     Stage::kSupervised});
  }
  LinearScorer a(small_features(), 6), b(small_features(), 6);
  TrainConfig config{3, {}, 9};
  EXPECT_EQ(train(a, pairs, 5, config), train(b, pairs, 5, config));
  EXPECT_EQ(a.weights_hash(), b.weights_hash());
  EXPECT_TRUE(std::equal(a.weights().begin(), a.weights().end(), b.weights().begin()));
}

TEST(Scorer, RejectsOutOfVocabularyTargets) {
  LinearScorer s(small_features(), 4);
  const std::vector<TrainingPair> bad{{{"q"}, {9}, "k", Stage::kSupervised}};
  EXPECT_THROW(train(s, bad, 3, {}), Error);
  const std::vector<TrainingPair> sentinel_inside{{{"q"}, {3}, "k", Stage::kSupervised}};
  EXPECT_THROW(train(s, sentinel_inside, 3, {}), Error);
  TrainConfig zero_lr;
  zero_lr.adamw.lr = 0;
  EXPECT_THROW(train(s, {}, 3, zero_lr), Error);
}

TEST(Scorer, CheckpointRoundTrip) {
  auto dir = testing::temp_dir("scorer_io");
  LinearScorer s(small_features(), 5);
  randomize(s, 3, 1.0);
  s.save((dir / "c.bin").string());
  auto back = LinearScorer::load((dir / "c.bin").string());
  EXPECT_EQ(back.vocab_size(), 5u);
  EXPECT_EQ(back.features().feature_dim, s.features().feature_dim);
  EXPECT_EQ(back.features().positions, s.features().positions);
  EXPECT_EQ(back.features().seed, s.features().seed);
  EXPECT_EQ(back.weights_hash(), s.weights_hash());
  testing::write_file(dir / "bad.bin", "GRSC");
  EXPECT_THROW(LinearScorer::load((dir / "bad.bin").string()), Error);
  EXPECT_THROW(LinearScorer::load((dir / "nope.bin").string()), Error);
}

TEST(Scorer, LossTraceCsv) {
  auto dir = testing::temp_dir("loss_trace");
  write_loss_trace((dir / "l.csv").string(), {2.5, 1.25});
  EXPECT_EQ(testing::read_file(dir / "l.csv"), "epoch,mean_loss\n1,2.5\n2,1.25\n");
}

}  // namespace
}  // namespace genret
