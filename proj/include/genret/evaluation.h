#pragma once

// Retrieval metrics, docid prefix-similarity analysis and stage ablations.

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "genret/decoder.h"
#include "genret/docid.h"
#include "genret/pq.h"

namespace genret {

struct EvalRecord {
  std::set<std::string> relevant;
  RankedResult ranking;
};

/// Mean over queries of |top-k ∩ relevant| / |relevant|.
double recall_at_k(const std::vector<EvalRecord>& records, std::size_t k);
/// Mean over queries of 1 / rank of the first relevant result within top-k.
double mrr_at_k(const std::vector<EvalRecord>& records, std::size_t k);

struct MetricReport {
  double recall_1 = 0.0;
  double recall_5 = 0.0;
  double recall_10 = 0.0;
  double mrr_10 = 0.0;
  std::size_t query_count = 0;
};

MetricReport evaluate(const std::vector<EvalRecord>& records);

/// Groups queries by text; each query's relevant set is every doc_key its
/// qrels name. `rankings[i]` belongs to the i-th distinct query, in order of
/// first appearance.
struct QueryGroup {
  std::string query;
  std::set<std::string> relevant;
};
std::vector<QueryGroup> group_queries(const std::vector<std::pair<std::string, std::string>>& qrels);

std::string metric_json(const MetricReport& report);
std::string metric_table(const std::vector<std::pair<std::string, MetricReport>>& rows);

struct Histogram {
  double low = -1.0;
  double bin_width = 0.025;
  std::vector<std::size_t> counts;
  std::size_t pair_count() const;
};

/// Bins values in [-1, 1]; the last bin is closed on the right.
Histogram make_histogram(const std::vector<double>& values, double bin_width);
void write_histogram_csv(const std::string& path, const Histogram& histogram);

double cosine_similarity(std::span<const double> a, std::span<const double> b);
/// Cosine similarity of every pair among `docs` (row indices).
std::vector<double> pairwise_cosine(const EmbeddingMatrix& emb,
                                    const std::vector<std::size_t>& docs);

struct PrefixSimilarity {
  std::vector<TokenId> prefix;         // the sampled group's shared prefix
  std::vector<std::size_t> documents;  // sampled row indices
  Histogram histogram;
  double mean_similarity = 0.0;
  std::size_t group_count = 0;  // qualifying groups (>= 2 docs)
};

/// Picks a prefix group of length `prefix_len` at random among those with at
/// least `sample_n` documents (the largest group when none is that big),
/// samples up to `sample_n` of its documents and histograms the cosine
/// similarity of every pair. Throws kData when no group has 2 documents.
PrefixSimilarity prefix_similarity_analysis(const DocidIndex& index, const EmbeddingMatrix& emb,
                                            std::size_t prefix_len, std::size_t sample_n,
                                            double bin_width, std::uint64_t seed);

/// Mean pairwise cosine of `sample_n` documents drawn uniformly at random.
double random_sample_similarity(const EmbeddingMatrix& emb, std::size_t sample_n,
                                std::uint64_t seed);

}  // namespace genret
