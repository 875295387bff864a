#include "genret/decoder.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_util.h"

namespace genret {
namespace {

using testing::random_indexed_corpus;

void expect_same_ranking(const RankedResult& a, const RankedResult& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].doc_key, b[i].doc_key) << "rank " << i;
    EXPECT_EQ(a[i].docid, b[i].docid);
    EXPECT_NEAR(a[i].score, b[i].score, 1e-9);
  }
}

TokenSequence random_query(Rng& rng, const Corpus& corpus) {
  const auto& d = corpus.documents[rng.below(corpus.size())];
  TokenSequence q;
  for (int i = 0; i < 3; ++i) q.push_back(d.tokens[rng.below(d.tokens.size())]);
  return q;
}

TEST(Beam, SaturatedEqualsBruteForce) {
  Rng rng(12);
  for (auto kind : {DocidKind::kKeyword, DocidKind::kPq, DocidKind::kAtomic}) {
    auto ic = random_indexed_corpus(kind, 80, 3);
    auto trie = PrefixTrie::build(ic.index);
    LinearScorer scorer(testing::tiny_features(), ic.index.vocab.size());
    testing::randomize_weights(scorer, 4, 1.0);
    const std::size_t n = ic.corpus.size();
    for (int q = 0; q < 5; ++q) {
      auto query = random_query(rng, ic.corpus);
      for (std::size_t k : {std::size_t{1}, std::size_t{10}, n}) {
        expect_same_ranking(constrained_beam_search(scorer, trie, query, n, k),
                            brute_force_rank(scorer, ic.index, query, k));
      }
    }
  }
}

TEST(Beam, UniformScorerReturnsShortestDocids) {
  auto ic = random_indexed_corpus(DocidKind::kKeyword, 60, 5);
  auto trie = PrefixTrie::build(ic.index);
  LinearScorer scorer(testing::tiny_features(), ic.index.vocab.size());
  auto docids = ic.index.docids;
  std::sort(docids.begin(), docids.end(), [](const DocidSequence& a, const DocidSequence& b) {
    return a.tokens.size() != b.tokens.size() ? a.tokens.size() < b.tokens.size()
                                              : a.tokens < b.tokens;
  });
  auto got = constrained_beam_search(scorer, trie, {"anything"}, docids.size(), 10);
  ASSERT_EQ(got.size(), 10u);
  const double ln_v = std::log(static_cast<double>(ic.index.vocab.size()));
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(got[i].docid, docids[i].tokens);
    EXPECT_NEAR(got[i].score, -(docids[i].tokens.size() + 1.0) * ln_v, 1e-9);
  }
}

TEST(Beam, SingleDocument) {
  auto corpus = make_corpus({testing::doc("only", "x y")});
  auto index = assign_atomic(corpus);
  auto trie = PrefixTrie::build(index);
  LinearScorer scorer(testing::tiny_features(), index.vocab.size());
  auto bf = brute_force_rank(scorer, index, {"q"}, 5);
  ASSERT_EQ(bf.size(), 1u);
  EXPECT_EQ(bf[0].doc_key, "only");
  EXPECT_EQ(bf[0].score, 2 * -std::log(2.0));
  expect_same_ranking(constrained_beam_search(scorer, trie, {"q"}, 5, 5), bf);
}

TEST(Beam, TrainedDocidRanksFirst) {
  auto corpus = make_corpus({testing::doc("a", "x"), testing::doc("b", "y")});
  auto index = assign_atomic(corpus);
  LinearScorer scorer(testing::tiny_features(), index.vocab.size());
  const TokenSequence q{"find", "b"};
  train(scorer, std::vector<TrainingPair>{{q, index.docids[1].tokens, "b", Stage::kSupervised}},
        index.vocab.sentinel(), {5, {}, 0});
  auto bf = brute_force_rank(scorer, index, q, 2);
  EXPECT_EQ(bf[0].doc_key, "b");
  EXPECT_GT(bf[0].score, bf[1].score);
}

TEST(Beam, AlwaysValidAndOrdered) {
  Rng rng(3);
  for (auto kind : {DocidKind::kKeyword, DocidKind::kPq, DocidKind::kAtomic}) {
    auto ic = random_indexed_corpus(kind, 150, 9);
    auto trie = PrefixTrie::build(ic.index);
    LinearScorer scorer(testing::tiny_features(), ic.index.vocab.size());
    testing::randomize_weights(scorer, 8, 5.0);  // sharp and adversarial
    for (int q = 0; q < 30; ++q) {
      const std::size_t width = 1 + rng.below(12);
      const std::size_t k = 1 + rng.below(width);
      auto result = constrained_beam_search(scorer, trie, random_query(rng, ic.corpus), width, k);
      ASSERT_FALSE(result.empty());
      ASSERT_LE(result.size(), k);
      std::set<std::string> keys;
      for (std::size_t i = 0; i < result.size(); ++i) {
        ASSERT_EQ(trie.lookup(result[i].docid), result[i].doc_key);
        ASSERT_LE(result[i].score, 0.0);
        if (i) ASSERT_LE(result[i].score, result[i - 1].score);
        keys.insert(result[i].doc_key);
      }
      ASSERT_EQ(keys.size(), result.size());
    }
  }
}

// Beam search is a heuristic: a wider beam can keep a prefix that later
// collapses and crowd out the path a narrow beam followed. The saturated beam
// is exact, so it dominates every width; between smaller widths we count
// regressions rather than forbid them.
TEST(Beam, WiderBeamsAndRankOneScore) {
  Rng rng(30);
  std::size_t comparisons = 0, regressions = 0;
  for (auto kind : {DocidKind::kKeyword, DocidKind::kPq}) {
    auto ic = random_indexed_corpus(kind, 200, 14);
    auto trie = PrefixTrie::build(ic.index);
    LinearScorer scorer(testing::tiny_features(), ic.index.vocab.size());
    testing::randomize_weights(scorer, 15, 1.5);
    const std::size_t widths[] = {1, 2, 5, 10, ic.corpus.size()};
    for (int q = 0; q < 40; ++q) {
      auto query = random_query(rng, ic.corpus);
      std::vector<double> best;
      for (auto w : widths) best.push_back(constrained_beam_search(scorer, trie, query, w, 1)[0].score);
      for (std::size_t i = 0; i + 1 < best.size(); ++i) {
        EXPECT_GE(best.back(), best[i]);
        ++comparisons;
        regressions += best[i + 1] < best[i];
      }
    }
  }
  RecordProperty("regressions", static_cast<int>(regressions));
  RecordProperty("comparisons", static_cast<int>(comparisons));
  EXPECT_LT(regressions * 10, comparisons);
}

TEST(Beam, Deterministic) {
  auto ic = random_indexed_corpus(DocidKind::kPq, 100, 2);
  auto trie = PrefixTrie::build(ic.index);
  LinearScorer scorer(testing::tiny_features(), ic.index.vocab.size());
  testing::randomize_weights(scorer, 2, 1.0);
  const TokenSequence q{ic.corpus.documents[3].tokens[0]};
  expect_same_ranking(constrained_beam_search(scorer, trie, q, 10, 10),
                      constrained_beam_search(scorer, trie, q, 10, 10));
}

TEST(Beam, ParameterErrors) {
  auto ic = random_indexed_corpus(DocidKind::kAtomic, 10, 1);
  auto trie = PrefixTrie::build(ic.index);
  LinearScorer scorer(testing::tiny_features(), ic.index.vocab.size());
  EXPECT_THROW(constrained_beam_search(scorer, trie, {"q"}, 5, 10), Error);
  EXPECT_THROW(constrained_beam_search(scorer, trie, {"q"}, 5, 0), Error);
  EXPECT_THROW(constrained_beam_search(scorer, PrefixTrie{}, {"q"}, 5, 5), Error);
}

TEST(Batch, IndependentOfComposition) {
  auto ic = random_indexed_corpus(DocidKind::kKeyword, 100, 6);
  auto trie = PrefixTrie::build(ic.index);
  LinearScorer scorer(testing::tiny_features(), ic.index.vocab.size());
  testing::randomize_weights(scorer, 6, 1.0);
  Rng rng(1);
  std::vector<TokenSequence> queries;
  for (int i = 0; i < 25; ++i) queries.push_back(random_query(rng, ic.corpus));
  auto all = retrieve_batch(scorer, trie, queries, 10, 10);
  auto serial = retrieve_batch(scorer, trie, queries, 10, 10, ExecPolicy::kSerial);
  EXPECT_EQ(all.latency.count, 25u);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto alone = retrieve_batch(scorer, trie, {queries[i]}, 10, 10);
    expect_same_ranking(alone.results[0], all.results[i]);
    expect_same_ranking(serial.results[i], all.results[i]);
  }
  auto empty = retrieve_batch(scorer, trie, {}, 10, 10);
  EXPECT_TRUE(empty.results.empty());
  EXPECT_EQ(empty.latency.count, 0u);
}

TEST(Batch, ThousandQueriesThousandDocs) {
  auto ic = random_indexed_corpus(DocidKind::kPq, 1000, 4);
  auto trie = PrefixTrie::build(ic.index);
  LinearScorer scorer(testing::tiny_features(), ic.index.vocab.size());
  Rng rng(2);
  std::vector<TokenSequence> queries;
  for (int i = 0; i < 1000; ++i) queries.push_back(random_query(rng, ic.corpus));
  auto batch = retrieve_batch(scorer, trie, queries, 10, 10);
  EXPECT_EQ(batch.latency.count, 1000u);
  EXPECT_LE(batch.latency.median_ms, batch.latency.p95_ms);
}

TEST(Latency, Summary) {
  auto r = summarize_latency({4, 1, 3, 2});
  EXPECT_EQ(r.count, 4u);
  EXPECT_EQ(r.mean_ms, 2.5);
  EXPECT_EQ(r.median_ms, 2.5);
  EXPECT_EQ(r.p95_ms, 4);
}

TEST(RetrievalFile, RoundTrip) {
  auto dir = testing::temp_dir("retrieval_tsv");
  std::vector<RankedResult> results{{{"a", -0.1234567890123, {}}, {"b", -2.5, {}}}, {}, {{"c", -1e-300, {}}}};
  write_retrieval_tsv((dir / "r.tsv").string(), results);
  auto back = read_retrieval_tsv((dir / "r.tsv").string(), 3);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0][0].doc_key, "a");
  EXPECT_EQ(back[0][0].score, results[0][0].score);
  EXPECT_TRUE(back[1].empty());
  EXPECT_EQ(back[2][0].score, -1e-300);
  EXPECT_THROW(read_retrieval_tsv((dir / "r.tsv").string(), 2), Error);
  write_latency_json((dir / "l.json").string(), summarize_latency({1, 2}));
  EXPECT_NE(testing::read_file(dir / "l.json").find("\"median_ms\":1.5"), std::string::npos);
}

}  // namespace
}  // namespace genret
