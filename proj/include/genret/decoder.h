#pragma once

// Constrained beam search over the docid trie, and an exhaustive ranking
// used as its oracle.

#include <cstddef>
#include <string>
#include <vector>

#include "genret/corpus.h"
#include "genret/docid.h"
#include "genret/kernels.h"
#include "genret/scorer.h"
#include "genret/trie.h"

namespace genret {

struct Hypothesis {
  std::vector<TokenId> prefix;  // includes the sentinel once complete
  double score = 0.0;           // cumulative log-probability
  bool complete = false;
};

struct RankedEntry {
  std::string doc_key;
  double score = 0.0;
  std::vector<TokenId> docid;  // without the sentinel
};

/// Scores non-increasing; ties ordered by ascending docid token ids.
using RankedResult = std::vector<RankedEntry>;

/// Beam search whose expansions are restricted to trie children. Scores are
/// unnormalized cumulative log-probabilities. Completed hypotheses move to a
/// finished pool; the search stops once the pool holds `beam_width` entries,
/// or holds `top_k` and no active hypothesis scores at least the top_k-th
/// finished score (log-probabilities only decrease). Throws kParameter
/// unless beam_width >= top_k >= 1 and kData on an empty trie.
RankedResult constrained_beam_search(const Scorer& scorer, const PrefixTrie& trie,
                                     const TokenSequence& query, std::size_t beam_width,
                                     std::size_t top_k);

/// Chain log-probability of `docid` followed by `sentinel`.
double chain_logprob(const ScoringSession& session, std::span<const TokenId> docid,
                     TokenId sentinel, std::size_t vocab_size);

/// Scores every docid exactly and sorts (score desc, docid tokens asc).
RankedResult brute_force_rank(const Scorer& scorer, const DocidIndex& index,
                              const TokenSequence& query, std::size_t top_k,
                              ExecPolicy policy = ExecPolicy::kSerial);

struct LatencyReport {
  std::size_t count = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct BatchResult {
  std::vector<RankedResult> results;
  LatencyReport latency;
};

/// Independent constrained_beam_search per query; OpenMP across queries
/// under kParallel.
BatchResult retrieve_batch(const Scorer& scorer, const PrefixTrie& trie,
                           const std::vector<TokenSequence>& queries, std::size_t beam_width,
                           std::size_t top_k, ExecPolicy policy = ExecPolicy::kParallel);

LatencyReport summarize_latency(std::vector<double> samples_ms);

/// TSV `query_index<TAB>rank<TAB>doc_key<TAB>score`, ranks from 1.
void write_retrieval_tsv(const std::string& path, const std::vector<RankedResult>& results);
/// Inverse of write_retrieval_tsv; `query_count` sizes the output.
std::vector<RankedResult> read_retrieval_tsv(const std::string& path, std::size_t query_count);
void write_latency_json(const std::string& path, const LatencyReport& report);

}  // namespace genret
