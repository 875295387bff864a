#pragma once

// Training-pair generation for the three stages (general pre-training,
// search-oriented pre-training, supervised fine-tuning) and the staged
// training schedule.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genret/corpus.h"
#include "genret/docid.h"
#include "genret/scorer.h"
#include "genret/training_pair.h"

namespace genret {

struct StagePlan {
  std::size_t window = 64;              // passage window s
  std::size_t passages_per_doc = 10;
  std::size_t term_seqs_per_doc = 1;
  std::size_t key_term_count = 10;
  std::size_t pseudo_queries_per_doc = 10;
  std::size_t general_epochs = 3;
  std::size_t search_epochs = 3;
  std::size_t supervised_epochs = 30;
  double lr = 1e-3;
};

/// Passage-to-docid and key-terms-to-docid pairs, in corpus order.
std::vector<TrainingPair> gen_general(const Corpus& corpus, const DocidIndex& index,
                                      const StagePlan& plan);

/// Extractive stand-in for a neural query generator: up to `k` distinct
/// spans of 3-8 tokens from the document's first passage, sampled without
/// replacement with weight 1 + (number of the document's top-10 tf-idf terms
/// in the span). When at most `k` distinct spans exist all are returned in
/// order of first occurrence.
std::vector<TokenSequence> gen_pseudo_queries(const Document& doc, const CorpusStats& stats,
                                              std::size_t k, std::uint64_t seed,
                                              std::size_t window = 64);

/// doc_key -> queries, from JSON lines `{doc_key, queries: [string]}`.
using PseudoQueryTable = std::map<std::string, std::vector<std::string>>;
PseudoQueryTable load_pseudo_queries(const std::string& path);

/// Pseudo-query pairs for every document. Documents present in `external`
/// use its queries (first `k`); the rest use gen_pseudo_queries with a
/// per-document seed derived from `seed` and the doc_key.
std::vector<TrainingPair> gen_search_oriented(const Corpus& corpus, const DocidIndex& index,
                                              const StagePlan& plan, std::uint64_t seed,
                                              const PseudoQueryTable* external = nullptr);

struct Qrel {
  std::string query;
  std::string doc_key;
};

/// TSV `query_text<TAB>doc_key`; malformed lines reported in diagnostics.
std::vector<Qrel> read_qrels(const std::string& path, Diagnostics* diagnostics = nullptr);
void write_qrels(const std::string& path, const std::vector<Qrel>& qrels);

/// One pair per qrel; unknown doc keys and empty queries are skipped with a
/// diagnostic. Throws kData when no pair survives.
std::vector<TrainingPair> gen_supervised(const std::vector<Qrel>& qrels, const Corpus& corpus,
                                         const DocidIndex& index,
                                         Diagnostics* diagnostics = nullptr);

/// TSV `stage<TAB>input tokens<TAB>docid tokens`.
void write_pairs_tsv(const std::string& path, const std::vector<TrainingPair>& pairs,
                     const DocidVocabulary& vocab);
/// Reads a pairs dump; doc_key is recovered through `index` when provided.
std::vector<TrainingPair> read_pairs_tsv(const std::string& path, const DocidIndex& index);

struct StageRun {
  std::string name;
  bool skipped = false;
  std::vector<double> loss_trace;
  std::uint64_t start_hash = 0;  // weights hash before the stage
  std::uint64_t end_hash = 0;    // weights hash after the stage
};

/// Trains general, then search-oriented, then supervised, each continuing
/// from the previous weights. A stage with zero epochs is skipped; a
/// non-skipped stage with no pairs is fatal.
std::vector<StageRun> run_three_stage(LinearScorer& scorer, TokenId sentinel,
                                      const StagePlan& plan,
                                      const std::vector<TrainingPair>& general,
                                      const std::vector<TrainingPair>& search_oriented,
                                      const std::vector<TrainingPair>& supervised,
                                      std::uint64_t seed);

}  // namespace genret
