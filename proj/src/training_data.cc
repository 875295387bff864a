#include "genret/training_data.h"

#include <algorithm>
#include <set>

#include "genret/io.h"
#include "genret/kernels.h"
#include "genret/rng.h"
#include "json.hpp"

namespace genret {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kGeneralPassage: return "general_passage";
    case Stage::kGeneralTerms: return "general_terms";
    case Stage::kPseudoQuery: return "pseudo_query";
    case Stage::kSupervised: return "supervised";
  }
  return "unknown";
}

Stage parse_stage(std::string_view name) {
  if (name == "general_passage") return Stage::kGeneralPassage;
  if (name == "general_terms") return Stage::kGeneralTerms;
  if (name == "pseudo_query") return Stage::kPseudoQuery;
  if (name == "supervised") return Stage::kSupervised;
  throw Error(ErrorKind::kFormat, "unknown stage '" + std::string(name) + "'");
}

std::vector<TrainingPair> gen_general(const Corpus& corpus, const DocidIndex& index,
                                      const StagePlan& plan) {
  GENRET_REQUIRE(index.docids.size() == corpus.size(), ErrorKind::kParameter,
                 "docids are not aligned with the corpus");
  std::vector<std::vector<TrainingPair>> per_doc(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) {
    const auto& doc = corpus.documents[i];
    const auto& docid = index.docids[i];
    auto& out = per_doc[i];
    if (plan.passages_per_doc > 0) {
      auto passages = segment_passages(doc, plan.window);
      passages.resize(std::min(passages.size(), plan.passages_per_doc));
      for (auto& p : passages) {
        out.push_back({std::move(p), docid.tokens, doc.doc_key, Stage::kGeneralPassage});
      }
    }
    if (plan.term_seqs_per_doc > 0) {
      const auto terms = select_key_terms(doc, corpus.stats, plan.key_term_count);
      for (std::size_t t = 0; t < plan.term_seqs_per_doc; ++t) {
        out.push_back({terms, docid.tokens, doc.doc_key, Stage::kGeneralTerms});
      }
    }
  });
  std::vector<TrainingPair> pairs;
  for (auto& doc_pairs : per_doc) {
    for (auto& p : doc_pairs) pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<TokenSequence> gen_pseudo_queries(const Document& doc, const CorpusStats& stats,
                                              std::size_t k, std::uint64_t seed,
                                              std::size_t window) {
  GENRET_REQUIRE(k >= 1, ErrorKind::kParameter, "pseudo-query count must be >= 1");
  constexpr std::size_t kMinSpan = 3;
  constexpr std::size_t kMaxSpan = 8;
  constexpr std::size_t kTopTerms = 10;

  const std::size_t first_len = std::min(window, doc.tokens.size());
  const TokenSequence first(doc.tokens.begin(),
                            doc.tokens.begin() + static_cast<std::ptrdiff_t>(first_len));
  const auto top = select_key_terms(doc, stats, kTopTerms);
  const std::set<std::string, std::less<>> top_set(top.begin(), top.end());

  // Distinct spans in order of first occurrence.
  std::vector<TokenSequence> spans;
  std::set<TokenSequence> seen;
  auto consider = [&](std::size_t start, std::size_t len) {
    TokenSequence span(first.begin() + static_cast<std::ptrdiff_t>(start),
                       first.begin() + static_cast<std::ptrdiff_t>(start + len));
    if (seen.insert(span).second) spans.push_back(std::move(span));
  };
  if (first.size() < kMinSpan) {
    consider(0, first.size());
  } else {
    for (std::size_t start = 0; start < first.size(); ++start) {
      for (std::size_t len = kMinSpan; len <= kMaxSpan && start + len <= first.size(); ++len) {
        consider(start, len);
      }
    }
  }
  if (spans.size() <= k) return spans;

  std::vector<double> weights(spans.size());
  for (std::size_t s = 0; s < spans.size(); ++s) {
    std::set<std::string_view> hits;
    for (const auto& t : spans[s]) {
      if (top_set.contains(t)) hits.insert(t);
    }
    weights[s] = 1.0 + static_cast<double>(hits.size());
  }
  double total = 0.0;
  for (double w : weights) total += w;

  Rng rng(seed);
  std::vector<TokenSequence> out;
  while (out.size() < k) {
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = spans.size();
    std::size_t last = 0;
    for (std::size_t s = 0; s < spans.size(); ++s) {
      if (weights[s] == 0.0) continue;
      last = s;
      acc += weights[s];
      if (acc > target) {
        pick = s;
        break;
      }
    }
    if (pick == spans.size()) pick = last;
    total -= weights[pick];
    weights[pick] = 0.0;
    out.push_back(spans[pick]);
  }
  return out;
}

PseudoQueryTable load_pseudo_queries(const std::string& path) {
  auto in = open_input(path);
  PseudoQueryTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto& queries = table[j.at("doc_key").get<std::string>()];
      for (const auto& q : j.at("queries")) queries.push_back(q.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kFormat,
                  path + ":" + std::to_string(line_no) + ": malformed pseudo-query record: " +
                      e.what());
    }
  }
  return table;
}

std::vector<TrainingPair> gen_search_oriented(const Corpus& corpus, const DocidIndex& index,
                                              const StagePlan& plan, std::uint64_t seed,
                                              const PseudoQueryTable* external) {
  GENRET_REQUIRE(index.docids.size() == corpus.size(), ErrorKind::kParameter,
                 "docids are not aligned with the corpus");
  std::vector<std::vector<TrainingPair>> per_doc(corpus.size());
  if (plan.pseudo_queries_per_doc == 0) return {};
  parallel_for(corpus.size(), [&](std::size_t i) {
    const auto& doc = corpus.documents[i];
    std::vector<TokenSequence> queries;
    const auto ext = external ? external->find(doc.doc_key) : PseudoQueryTable::const_iterator{};
    if (external && ext != external->end()) {
      for (const auto& q : ext->second) {
        if (queries.size() == plan.pseudo_queries_per_doc) break;
        auto tokens = tokenize(q);
        if (!tokens.empty()) queries.push_back(std::move(tokens));
      }
    } else {
      queries = gen_pseudo_queries(doc, corpus.stats, plan.pseudo_queries_per_doc,
                                   derive_seed(seed, doc.doc_key), plan.window);
    }
    for (auto& q : queries) {
      per_doc[i].push_back({std::move(q), index.docids[i].tokens, doc.doc_key,
                            Stage::kPseudoQuery});
    }
  });
  std::vector<TrainingPair> pairs;
  for (auto& doc_pairs : per_doc) {
    for (auto& p : doc_pairs) pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<Qrel> read_qrels(const std::string& path, Diagnostics* diagnostics) {
  auto in = open_input(path);
  std::vector<Qrel> qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() < 2 || fields[1].empty()) {
      if (diagnostics) {
        diagnostics->add(path + ":" + std::to_string(line_no) + ": expected query<TAB>doc_key");
      }
      continue;
    }
    qrels.push_back({fields[0], fields[1]});
  }
  return qrels;
}

void write_qrels(const std::string& path, const std::vector<Qrel>& qrels) {
  auto out = open_output(path);
  for (const auto& q : qrels) out << q.query << '\t' << q.doc_key << '\n';
}

std::vector<TrainingPair> gen_supervised(const std::vector<Qrel>& qrels, const Corpus& corpus,
                                         const DocidIndex& index, Diagnostics* diagnostics) {
  GENRET_REQUIRE(index.docids.size() == corpus.size(), ErrorKind::kParameter,
                 "docids are not aligned with the corpus");
  std::vector<TrainingPair> pairs;
  for (std::size_t i = 0; i < qrels.size(); ++i) {
    const std::size_t doc = corpus.find(qrels[i].doc_key);
    if (doc == Corpus::npos) {
      if (diagnostics) {
        diagnostics->add("qrel " + std::to_string(i + 1) + ": unknown doc_key '" +
                         qrels[i].doc_key + "'; skipped");
      }
      continue;
    }
    auto tokens = tokenize(qrels[i].query);
    if (tokens.empty()) {
      if (diagnostics) diagnostics->add("qrel " + std::to_string(i + 1) + ": empty query; skipped");
      continue;
    }
    pairs.push_back({std::move(tokens), index.docids[doc].tokens, qrels[i].doc_key,
                     Stage::kSupervised});
  }
  GENRET_REQUIRE(!pairs.empty(), ErrorKind::kData, "no valid supervised pairs");
  return pairs;
}

void write_pairs_tsv(const std::string& path, const std::vector<TrainingPair>& pairs,
                     const DocidVocabulary& vocab) {
  auto out = open_output(path);
  for (const auto& p : pairs) {
    out << to_string(p.stage) << '\t' << join(p.input, " ") << '\t'
        << join(vocab.decode(p.target), " ") << '\n';
  }
}

std::vector<TrainingPair> read_pairs_tsv(const std::string& path, const DocidIndex& index) {
  std::map<std::vector<TokenId>, std::string> key_of;
  for (const auto& d : index.docids) key_of.emplace(d.tokens, d.doc_key);
  std::vector<TrainingPair> pairs;
  std::size_t line = 0;
  for (const auto& row : read_tsv(path)) {
    ++line;
    GENRET_REQUIRE(row.size() == 3, ErrorKind::kFormat,
                   path + ":" + std::to_string(line) + ": expected 3 fields");
    TrainingPair p;
    p.stage = parse_stage(row[0]);
    for (auto& t : split(row[1], ' ')) {
      if (!t.empty()) p.input.push_back(std::move(t));
    }
    RawDocid raw;
    for (auto& t : split(row[2], ' ')) {
      if (!t.empty()) raw.push_back(std::move(t));
    }
    p.target = index.vocab.encode(raw);
    const auto it = key_of.find(p.target);
    GENRET_REQUIRE(it != key_of.end(), ErrorKind::kData,
                   path + ":" + std::to_string(line) + ": target is not a docid of the index");
    p.doc_key = it->second;
    GENRET_REQUIRE(!p.input.empty(), ErrorKind::kFormat,
                   path + ":" + std::to_string(line) + ": empty input");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<StageRun> run_three_stage(LinearScorer& scorer, TokenId sentinel,
                                      const StagePlan& plan,
                                      const std::vector<TrainingPair>& general,
                                      const std::vector<TrainingPair>& search_oriented,
                                      const std::vector<TrainingPair>& supervised,
                                      std::uint64_t seed) {
  struct StageSpec {
    const char* name;
    std::size_t epochs;
    const std::vector<TrainingPair>* pairs;
  };
  const StageSpec stages[] = {
      {"general", plan.general_epochs, &general},
      {"search", plan.search_epochs, &search_oriented},
      {"supervised", plan.supervised_epochs, &supervised},
  };
  std::vector<StageRun> runs;
  for (const auto& stage : stages) {
    StageRun run;
    run.name = stage.name;
    run.start_hash = scorer.weights_hash();
    if (stage.epochs == 0) {
      run.skipped = true;
      run.end_hash = run.start_hash;
      runs.push_back(std::move(run));
      continue;
    }
    GENRET_REQUIRE(!stage.pairs->empty(), ErrorKind::kData,
                   std::string("stage '") + stage.name + "' has no training pairs");
    TrainConfig config;
    config.epochs = stage.epochs;
    config.adamw.lr = plan.lr;
    config.seed = derive_seed(seed, stage.name);
    run.loss_trace = train(scorer, *stage.pairs, sentinel, config);
    run.end_hash = scorer.weights_hash();
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace genret
