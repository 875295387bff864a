#pragma once

// Document embeddings and product quantization.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genret/common.h"
#include "genret/corpus.h"
#include "genret/docid.h"
#include "genret/kernels.h"

namespace genret {

/// Row-major n x dim matrix aligned with corpus order.
struct EmbeddingMatrix {
  std::size_t dim = 0;
  std::vector<std::string> doc_keys;
  std::vector<double> values;

  std::size_t rows() const { return doc_keys.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
};

/// tf-idf vectors projected to `dim` dimensions by a seeded Gaussian
/// projection, then L2-normalized. A document whose tf-idf vector is zero
/// (every term in every document) falls back to raw term counts.
EmbeddingMatrix embed_documents(const Corpus& corpus, std::size_t dim, std::uint64_t seed,
                                ExecPolicy policy = ExecPolicy::kParallel);

/// JSON lines `{doc_key, vector}`; reordered to corpus order.
EmbeddingMatrix load_embeddings(const std::string& path, const Corpus& corpus);
void save_embeddings(const std::string& path, const EmbeddingMatrix& emb);

struct PQCodebook {
  std::size_t m = 0;          // groups
  std::size_t k = 0;          // centroids per group
  std::size_t group_dim = 0;  // D / m
  std::uint64_t seed = 0;
  /// m x k x group_dim, group-major.
  std::vector<double> centroids;
  /// Per group, WCSS after each assignment step.
  std::vector<std::vector<double>> wcss_trace;

  std::size_t dim() const { return m * group_dim; }
  std::size_t token_count() const { return m * k; }
  std::span<const double> centroid(std::size_t group, std::size_t cluster) const {
    return {centroids.data() + (group * k + cluster) * group_dim, group_dim};
  }
};

/// Independent k-means per coordinate group: k-means++ seeding, Lloyd
/// iterations until the assignment stops changing or `max_iters`. Empty
/// clusters are reseeded to the point farthest from its centroid.
PQCodebook train_codebook(const EmbeddingMatrix& emb, std::size_t m, std::size_t k,
                          std::uint64_t seed, std::size_t max_iters,
                          ExecPolicy policy = ExecPolicy::kParallel);

/// Token id per group: group * k + nearest cluster (lowest id on ties).
std::vector<TokenId> encode_pq(std::span<const double> vector, const PQCodebook& codebook);

std::string pq_token(std::size_t group, std::size_t cluster);

/// PQ docids for every document, made unique.
DocidIndex build_pq_index(const Corpus& corpus, const EmbeddingMatrix& emb,
                          const PQCodebook& codebook);

void save_codebook(const std::string& path, const PQCodebook& codebook);
PQCodebook load_codebook(const std::string& path);

}  // namespace genret
