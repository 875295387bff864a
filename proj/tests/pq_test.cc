#include "genret/pq.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "genret/rng.h"
#include "genret/synthetic.h"
#include "test_util.h"

namespace genret {
namespace {

using testing::doc;

EmbeddingMatrix matrix(std::size_t dim, const std::vector<std::vector<double>>& rows) {
  EmbeddingMatrix emb;
  emb.dim = dim;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    emb.doc_keys.push_back("d" + std::to_string(i));
    emb.values.insert(emb.values.end(), rows[i].begin(), rows[i].end());
  }
  return emb;
}

EmbeddingMatrix random_matrix(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& r : rows) {
    for (auto& x : r) x = rng.normal();
  }
  return matrix(dim, rows);
}

std::vector<double> sorted_centroids(const PQCodebook& cb, std::size_t group) {
  std::vector<double> values;
  for (std::size_t c = 0; c < cb.k; ++c) values.push_back(cb.centroid(group, c)[0]);
  std::sort(values.begin(), values.end());
  return values;
}

TEST(Codebook, FourPointFixture) {
  auto emb = matrix(2, {{0, 0}, {0, 1}, {10, 0}, {10, 1}});
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    auto cb = train_codebook(emb, 2, 2, seed, 25);
    EXPECT_EQ(sorted_centroids(cb, 0), (std::vector<double>{0, 10}));
    EXPECT_EQ(sorted_centroids(cb, 1), (std::vector<double>{0, 1}));
  }
}

TEST(Codebook, KEqualsNGivesZeroWcss) {
  auto emb = random_matrix(12, 6, 4);
  auto cb = train_codebook(emb, 3, 12, 9, 25);
  for (const auto& trace : cb.wcss_trace) {
    ASSERT_FALSE(trace.empty());
    EXPECT_EQ(trace.back(), 0.0);
  }
}

TEST(Codebook, WcssNonIncreasing) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto emb = random_matrix(200, 8, seed);
    auto cb = train_codebook(emb, 4, 10, seed, 50);
    ASSERT_EQ(cb.wcss_trace.size(), 4u);
    for (const auto& trace : cb.wcss_trace) {
      for (std::size_t i = 1; i < trace.size(); ++i) {
        EXPECT_LE(trace[i], trace[i - 1] * (1 + 1e-12));
      }
    }
  }
}

TEST(Codebook, SerialParallelIdentical) {
  auto emb = random_matrix(150, 12, 3);
  auto a = train_codebook(emb, 3, 8, 5, 30, ExecPolicy::kSerial);
  auto b = train_codebook(emb, 3, 8, 5, 30, ExecPolicy::kParallel);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.wcss_trace, b.wcss_trace);
}

TEST(Codebook, ParameterErrors) {
  auto emb = random_matrix(5, 6, 1);
  EXPECT_THROW(train_codebook(emb, 4, 2, 1, 10), Error);  // 6 % 4 != 0
  EXPECT_THROW(train_codebook(emb, 3, 6, 1, 10), Error);  // k > n
  EXPECT_THROW(train_codebook(emb, 3, 2, 1, 0), Error);
}

TEST(EncodePq, MatchesExhaustiveScan) {
  auto emb = random_matrix(100, 12, 8);
  auto cb = train_codebook(emb, 4, 16, 2, 20);
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(cb.dim());
    for (auto& x : v) x = rng.normal();
    auto tokens = encode_pq(v, cb);
    ASSERT_EQ(tokens.size(), cb.m);
    for (std::size_t g = 0; g < cb.m; ++g) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < cb.k; ++c) {
        double d = 0;
        for (std::size_t j = 0; j < cb.group_dim; ++j) {
          const double diff = v[g * cb.group_dim + j] - cb.centroid(g, c)[j];
          d += diff * diff;
        }
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      ASSERT_EQ(tokens[g], g * cb.k + best);
    }
  }
}

TEST(EncodePq, CentroidConcatenationIsExact) {
  auto emb = random_matrix(50, 8, 2);
  auto cb = train_codebook(emb, 4, 5, 3, 20);
  std::vector<double> v;
  std::vector<TokenId> expected;
  for (std::size_t g = 0; g < cb.m; ++g) {
    const std::size_t c = (g * 3) % cb.k;
    auto cen = cb.centroid(g, c);
    v.insert(v.end(), cen.begin(), cen.end());
    expected.push_back(static_cast<TokenId>(g * cb.k + c));
  }
  EXPECT_EQ(encode_pq(v, cb), expected);
  EXPECT_THROW(encode_pq(std::vector<double>(3), cb), Error);
}

TEST(EncodePq, FullScaleShape) {
  auto emb = random_matrix(300, 48, 6);
  auto cb = train_codebook(emb, 24, 256, 1, 5);
  EXPECT_EQ(cb.token_count(), 6144u);
  auto tokens = encode_pq(emb.row(0), cb);
  ASSERT_EQ(tokens.size(), 24u);
  for (auto t : tokens) EXPECT_LT(t, 6144u);
}

TEST(Embed, DeterministicNormalizedContentOnly) {
  auto corpus = make_corpus({doc("a", "red fish blue fish"), doc("b", "red fish blue fish"),
                             doc("c", "green eggs ham"), doc("d", "one two")});
  auto e1 = embed_documents(corpus, 16, 5);
  auto e2 = embed_documents(corpus, 16, 5, ExecPolicy::kSerial);
  EXPECT_EQ(e1.values, e2.values);
  for (std::size_t i = 0; i < e1.rows(); ++i) {
    double norm = 0;
    for (double x : e1.row(i)) norm += x * x;
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
  }
  EXPECT_TRUE(std::equal(e1.row(0).begin(), e1.row(0).end(), e1.row(1).begin()));
}

TEST(Embed, AllSharedTermsFallBackToCounts) {
  auto corpus = make_corpus({doc("a", "x y"), doc("b", "y x")});
  auto e = embed_documents(corpus, 4, 1);
  double norm = 0;
  for (double x : e.row(0)) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-9);
}

TEST(Embeddings, LoadSaveAndErrors) {
  auto dir = testing::temp_dir("emb_io");
  auto corpus = make_corpus({doc("a", "x"), doc("b", "y")});
  auto e = embed_documents(corpus, 4, 1);
  save_embeddings((dir / "e.jsonl").string(), e);
  auto back = load_embeddings((dir / "e.jsonl").string(), corpus);
  EXPECT_EQ(back.dim, 4u);
  EXPECT_EQ(back.values, e.values);

  testing::write_file(dir / "missing.jsonl", "{\"doc_key\":\"a\",\"vector\":[1,2,3,4]}\n");
  try {
    load_embeddings((dir / "missing.jsonl").string(), corpus);
    FAIL();
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("'b'"), std::string::npos);
  }
  testing::write_file(dir / "mismatch.jsonl",
                      "{\"doc_key\":\"a\",\"vector\":[1,2,3,4]}\n"
                      "{\"doc_key\":\"b\",\"vector\":[1,2,3]}\n");
  try {
    load_embeddings((dir / "mismatch.jsonl").string(), corpus);
    FAIL();
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("dimension mismatch"), std::string::npos);
  }
}

TEST(PqIndex, UniqueDocidsAndCodebookRoundTrip) {
  SyntheticConfig config;
  config.docs = 200;
  config.duplicate_fraction = 0.5;
  auto corpus = make_corpus(make_synthetic_corpus(config).documents);
  auto emb = embed_documents(corpus, 16, 3);
  auto cb = train_codebook(emb, 2, 4, 3, 20);  // 16 codes for 200 docs forces collisions
  auto index = build_pq_index(corpus, emb, cb);
  EXPECT_EQ(count_distinct(index.docids), corpus.size());
  EXPECT_EQ(index.vocab.token(0), pq_token(0, 0));
  EXPECT_EQ(index.vocab.token(5), "pq_1_1");

  auto dir = testing::temp_dir("codebook_io");
  save_codebook((dir / "cb.json").string(), cb);
  auto back = load_codebook((dir / "cb.json").string());
  EXPECT_EQ(back.m, cb.m);
  EXPECT_EQ(back.k, cb.k);
  EXPECT_EQ(back.centroids, cb.centroids);
}

}  // namespace
}  // namespace genret
