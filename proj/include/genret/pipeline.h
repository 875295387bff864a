#pragma once

// End-to-end orchestration shared by the CLI, the ablation runner and the
// acceptance suite.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "genret/corpus.h"
#include "genret/decoder.h"
#include "genret/docid.h"
#include "genret/evaluation.h"
#include "genret/pq.h"
#include "genret/scorer.h"
#include "genret/training_data.h"
#include "genret/trie.h"

namespace genret {

struct PipelineConfig {
  DocidKind docid_kind = DocidKind::kPq;
  KeywordDocidConfig keyword;
  std::size_t embed_dim = 768;   // D
  std::size_t pq_groups = 24;    // m
  std::size_t pq_clusters = 256; // k
  std::size_t kmeans_iters = 25;
  StagePlan plan;
  FeatureConfig features;
  std::size_t beam_width = 10;
  std::size_t top_k = 10;
  std::uint64_t seed = 42;
};

struct BuiltIndex {
  DocidIndex index;
  PrefixTrie trie;
  std::optional<EmbeddingMatrix> embeddings;
  std::optional<PQCodebook> codebook;
};

/// Docids of the configured kind plus their trie. PQ docids use
/// `embeddings` when given, otherwise embed_documents.
BuiltIndex build_index(const Corpus& corpus, const PipelineConfig& config,
                       const EmbeddingMatrix* embeddings = nullptr);

struct StageData {
  std::vector<TrainingPair> general;
  std::vector<TrainingPair> search_oriented;
  std::vector<TrainingPair> supervised;
  Diagnostics diagnostics;
};

StageData generate_stage_data(const Corpus& corpus, const DocidIndex& index,
                              const std::vector<Qrel>& train_qrels, const PipelineConfig& config,
                              const PseudoQueryTable* external = nullptr);

struct TrainedModel {
  LinearScorer scorer;
  std::vector<StageRun> stages;
};

TrainedModel train_model(const StageData& data, const DocidIndex& index,
                         const PipelineConfig& config);

struct Evaluation {
  std::vector<QueryGroup> queries;
  BatchResult batch;
  MetricReport report;
};

Evaluation evaluate_queries(const Scorer& scorer, const PrefixTrie& trie,
                            const std::vector<Qrel>& test_qrels, const PipelineConfig& config);

struct PipelineResult {
  BuiltIndex built;
  std::vector<StageRun> stages;
  Evaluation evaluation;
};

PipelineResult run_pipeline(const Corpus& corpus, const std::vector<Qrel>& train_qrels,
                            const std::vector<Qrel>& test_qrels, const PipelineConfig& config);

struct AblationRow {
  std::string variant;
  MetricReport report;
};

/// The full model and each single-stage-removed variant ("w/o general
/// pretrain", "w/o search-oriented", "w/o finetune"), evaluated on
/// `test_qrels` over one shared index and pair set.
std::vector<AblationRow> ablation_run(const Corpus& corpus, const std::vector<Qrel>& train_qrels,
                                      const std::vector<Qrel>& test_qrels,
                                      const PipelineConfig& config);

}  // namespace genret
