#include "genret/pipeline.h"

#include "genret/rng.h"

namespace genret {

BuiltIndex build_index(const Corpus& corpus, const PipelineConfig& config,
                       const EmbeddingMatrix* embeddings) {
  BuiltIndex built;
  switch (config.docid_kind) {
    case DocidKind::kKeyword:
      built.index = build_keyword_index(corpus, config.keyword);
      break;
    case DocidKind::kAtomic:
      built.index = assign_atomic(corpus);
      break;
    case DocidKind::kPq: {
      built.embeddings = embeddings ? *embeddings
                                    : embed_documents(corpus, config.embed_dim,
                                                      derive_seed(config.seed, "embed"));
      built.codebook = train_codebook(*built.embeddings, config.pq_groups, config.pq_clusters,
                                      derive_seed(config.seed, "pq"), config.kmeans_iters);
      built.index = build_pq_index(corpus, *built.embeddings, *built.codebook);
      break;
    }
  }
  built.trie = PrefixTrie::build(built.index);
  return built;
}

StageData generate_stage_data(const Corpus& corpus, const DocidIndex& index,
                              const std::vector<Qrel>& train_qrels, const PipelineConfig& config,
                              const PseudoQueryTable* external) {
  StageData data;
  data.general = gen_general(corpus, index, config.plan);
  data.search_oriented = gen_search_oriented(corpus, index, config.plan,
                                             derive_seed(config.seed, "pseudo-queries"), external);
  if (!train_qrels.empty()) {
    data.supervised = gen_supervised(train_qrels, corpus, index, &data.diagnostics);
  }
  return data;
}

TrainedModel train_model(const StageData& data, const DocidIndex& index,
                         const PipelineConfig& config) {
  FeatureConfig features = config.features;
  features.seed = derive_seed(config.seed, "features");
  TrainedModel model{LinearScorer(features, index.vocab.size()), {}};
  model.stages = run_three_stage(model.scorer, index.vocab.sentinel(), config.plan, data.general,
                                 data.search_oriented, data.supervised,
                                 derive_seed(config.seed, "train"));
  return model;
}

Evaluation evaluate_queries(const Scorer& scorer, const PrefixTrie& trie,
                            const std::vector<Qrel>& test_qrels, const PipelineConfig& config) {
  Evaluation eval;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& q : test_qrels) pairs.emplace_back(q.query, q.doc_key);
  eval.queries = group_queries(pairs);
  std::vector<TokenSequence> queries;
  for (const auto& g : eval.queries) queries.push_back(tokenize(g.query));
  eval.batch = retrieve_batch(scorer, trie, queries, config.beam_width, config.top_k);
  std::vector<EvalRecord> records;
  for (std::size_t i = 0; i < eval.queries.size(); ++i) {
    records.push_back({eval.queries[i].relevant, eval.batch.results[i]});
  }
  eval.report = evaluate(records);
  return eval;
}

PipelineResult run_pipeline(const Corpus& corpus, const std::vector<Qrel>& train_qrels,
                            const std::vector<Qrel>& test_qrels, const PipelineConfig& config) {
  PipelineResult result;
  result.built = build_index(corpus, config);
  const auto data = generate_stage_data(corpus, result.built.index, train_qrels, config);
  auto model = train_model(data, result.built.index, config);
  result.stages = std::move(model.stages);
  result.evaluation = evaluate_queries(model.scorer, result.built.trie, test_qrels, config);
  return result;
}

std::vector<AblationRow> ablation_run(const Corpus& corpus, const std::vector<Qrel>& train_qrels,
                                      const std::vector<Qrel>& test_qrels,
                                      const PipelineConfig& config) {
  const auto built = build_index(corpus, config);
  const auto data = generate_stage_data(corpus, built.index, train_qrels, config);

  struct Variant {
    const char* name;
    std::size_t StagePlan::*disabled;
  };
  const Variant variants[] = {
      {"full", nullptr},
      {"w/o general pretrain", &StagePlan::general_epochs},
      {"w/o search-oriented", &StagePlan::search_epochs},
      {"w/o finetune", &StagePlan::supervised_epochs},
  };
  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    PipelineConfig variant = config;
    if (v.disabled) variant.plan.*v.disabled = 0;
    const auto model = train_model(data, built.index, variant);
    rows.push_back({v.name, evaluate_queries(model.scorer, built.trie, test_qrels, variant).report});
  }
  return rows;
}

}  // namespace genret
