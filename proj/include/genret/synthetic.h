#pragma once

// Synthetic topical corpora with held-out queries, used by the toy
// benchmark, the acceptance suite and `genret synth`.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "genret/corpus.h"
#include "genret/training_data.h"

namespace genret {

struct SyntheticConfig {
  std::size_t docs = 500;
  std::size_t topics = 25;
  std::size_t topic_words = 40;      // vocabulary per topic
  std::size_t common_words = 150;    // shared function-like words
  std::size_t favorite_words = 8;    // topic words a document prefers
  std::size_t signature_words = 4;   // words unique to one document
  std::size_t body_length = 200;
  std::size_t train_queries_per_doc = 1;
  /// Probability that a query names its document by an alias that never
  /// occurs in the document text (query/document vocabulary mismatch).
  double alias_rate = 0.5;
  std::size_t test_queries = 100;
  /// Fraction of documents that copy the url and title of another document.
  double duplicate_fraction = 0.0;
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  std::vector<Document> documents;
  std::vector<Qrel> train_qrels;
  std::vector<Qrel> test_qrels;  // distinct documents, unseen query samples
};

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& config);

/// Writes the corpus as JSON lines.
void write_corpus_jsonl(const std::string& path, const std::vector<Document>& documents);

}  // namespace genret
