// genret: command-line driver for the generative retrieval pipeline.
//
//   genret [--config FILE] [--seed N] [--out DIR] <command> [flags]
//
// Artifacts are read from and written to --out. A config file holds
// `key = value` lines; each key is applied as `--key=value` and an explicit
// command-line flag overrides it.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "genret/corpus.h"
#include "genret/decoder.h"
#include "genret/docid.h"
#include "genret/evaluation.h"
#include "genret/io.h"
#include "genret/pipeline.h"
#include "genret/pq.h"
#include "genret/rng.h"
#include "genret/synthetic.h"
#include "genret/training_data.h"
#include "genret/trie.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace genret;

namespace {

struct Options {
  std::string config_path;
  std::uint64_t seed = 42;
  std::string out = "genret_out";

  std::string corpus;
  std::string qrels;
  std::string queries;
  std::string embeddings;
  std::string pseudo_queries;

  std::string docid_kind = "pq";
  std::size_t title_length = 2;
  std::size_t embed_dim = 768;
  std::size_t pq_groups = 24;
  std::size_t pq_clusters = 256;
  std::size_t kmeans_iters = 25;

  StagePlan plan;
  std::size_t feature_dim = std::size_t{1} << 18;
  std::size_t positions = 64;
  std::vector<std::string> skip_stages;

  std::size_t beam = 10;
  std::size_t topk = 10;

  std::size_t prefix_len = 2;
  std::size_t sample_n = 100;
  double bin_width = 0.025;

  SyntheticConfig synth;
};

std::string artifact(const Options& o, const std::string& name) {
  return (fs::path(o.out) / name).string();
}

void require_file(const std::string& path, const std::string& what) {
  GENRET_REQUIRE(!path.empty(), ErrorKind::kConfig, what + " is required");
  GENRET_REQUIRE(fs::exists(path), ErrorKind::kIo, "missing " + what + " '" + path + "'");
}

PipelineConfig pipeline_config(const Options& o) {
  PipelineConfig c;
  c.docid_kind = parse_docid_kind(o.docid_kind);
  c.keyword.title_length_threshold = o.title_length;
  c.embed_dim = o.embed_dim;
  c.pq_groups = o.pq_groups;
  c.pq_clusters = o.pq_clusters;
  c.kmeans_iters = o.kmeans_iters;
  c.plan = o.plan;
  c.features.feature_dim = o.feature_dim;
  c.features.positions = o.positions;
  c.beam_width = o.beam;
  c.top_k = o.topk;
  c.seed = o.seed;
  return c;
}

Corpus load_checked(const std::string& path) {
  require_file(path, "corpus");
  auto load = load_corpus(path);
  for (const auto& m : load.diagnostics.messages) std::cerr << "warning: " << m << '\n';
  return std::move(load.corpus);
}

DocidIndex load_index(const Options& o) {
  require_file(artifact(o, "docids.tsv"), "docid dump");
  require_file(artifact(o, "vocab.json"), "docid vocabulary");
  return read_docid_index(artifact(o, "docids.tsv"), artifact(o, "vocab.json"));
}

void check_aligned(const Corpus& corpus, const DocidIndex& index) {
  GENRET_REQUIRE(corpus.size() == index.docids.size(), ErrorKind::kData,
                 "corpus has " + std::to_string(corpus.size()) + " documents but the docid dump has " +
                     std::to_string(index.docids.size()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    GENRET_REQUIRE(corpus.documents[i].doc_key == index.docids[i].doc_key, ErrorKind::kData,
                   "docid dump does not follow corpus order at '" +
                       corpus.documents[i].doc_key + "'");
  }
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

// Queries in order of first appearance; the retrieval TSV indexes this list.
std::vector<QueryGroup> load_query_groups(const std::string& path) {
  require_file(path, "query file");
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& fields : read_tsv(path)) {
    rows.emplace_back(fields[0], fields.size() > 1 ? fields[1] : std::string());
  }
  auto groups = group_queries(rows);
  for (auto& g : groups) g.relevant.erase("");
  return groups;
}

void cmd_synth(const Options& o) {
  SyntheticConfig config = o.synth;
  config.seed = o.seed;
  const auto synth = make_synthetic_corpus(config);
  write_corpus_jsonl(artifact(o, "corpus.jsonl"), synth.documents);
  write_qrels(artifact(o, "train_qrels.tsv"), synth.train_qrels);
  write_qrels(artifact(o, "test_qrels.tsv"), synth.test_qrels);
  std::cout << "wrote " << synth.documents.size() << " documents, " << synth.train_qrels.size()
            << " training and " << synth.test_qrels.size() << " test queries\n";
}

void cmd_ingest(const Options& o) {
  require_file(o.corpus, "corpus");
  const auto load = load_corpus(o.corpus);
  for (const auto& m : load.diagnostics.messages) std::cerr << "warning: " << m << '\n';
  std::size_t tokens = 0;
  for (const auto& d : load.corpus.documents) tokens += d.tokens.size();
  nlohmann::ordered_json j;
  j["corpus"] = o.corpus;
  j["doc_count"] = load.corpus.size();
  j["skipped_empty"] = load.skipped_empty;
  j["malformed"] = load.malformed;
  j["term_count"] = load.corpus.stats.doc_frequency.size();
  j["token_count"] = tokens;
  j["diagnostics"] = load.diagnostics.messages;
  write_text(artifact(o, "ingest.json"), j.dump(2) + "\n");
  std::cout << load.corpus.size() << " documents, " << load.skipped_empty << " empty, "
            << load.malformed << " malformed, " << j["term_count"] << " distinct terms\n";
}

void cmd_build_docids(const Options& o) {
  const auto corpus = load_checked(o.corpus);
  const auto config = pipeline_config(o);
  std::optional<EmbeddingMatrix> external;
  if (!o.embeddings.empty()) {
    require_file(o.embeddings, "embedding file");
    external = load_embeddings(o.embeddings, corpus);
  }
  const auto built = build_index(corpus, config, external ? &*external : nullptr);
  for (const auto& m : built.index.diagnostics.messages) std::cerr << "warning: " << m << '\n';
  write_docids_tsv(artifact(o, "docids.tsv"), built.index);
  write_vocabulary(artifact(o, "vocab.json"), built.index.vocab);
  built.trie.save(artifact(o, "trie.bin"));
  if (built.codebook) save_codebook(artifact(o, "codebook.json"), *built.codebook);
  if (built.embeddings) save_embeddings(artifact(o, "embeddings.jsonl"), *built.embeddings);
  std::cout << built.index.docids.size() << " " << o.docid_kind << " docids, vocabulary "
            << built.index.vocab.size() << ", trie nodes " << built.trie.node_count() << " (~"
            << built.trie.memory_bytes() << " bytes)\n";
}

void cmd_gen_data(const Options& o) {
  const auto corpus = load_checked(o.corpus);
  const auto index = load_index(o);
  check_aligned(corpus, index);
  std::optional<PseudoQueryTable> external;
  if (!o.pseudo_queries.empty()) {
    require_file(o.pseudo_queries, "pseudo-query file");
    external = load_pseudo_queries(o.pseudo_queries);
  }
  std::vector<Qrel> qrels;
  Diagnostics diagnostics;
  if (!o.qrels.empty()) {
    require_file(o.qrels, "qrels file");
    qrels = read_qrels(o.qrels, &diagnostics);
  }
  auto data = generate_stage_data(corpus, index, qrels, pipeline_config(o),
                                  external ? &*external : nullptr);
  for (const auto& m : diagnostics.messages) std::cerr << "warning: " << m << '\n';
  for (const auto& m : data.diagnostics.messages) std::cerr << "warning: " << m << '\n';
  write_pairs_tsv(artifact(o, "pairs_general.tsv"), data.general, index.vocab);
  write_pairs_tsv(artifact(o, "pairs_search.tsv"), data.search_oriented, index.vocab);
  write_pairs_tsv(artifact(o, "pairs_supervised.tsv"), data.supervised, index.vocab);
  std::cout << data.general.size() << " general, " << data.search_oriented.size()
            << " search-oriented, " << data.supervised.size() << " supervised pairs\n";
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void cmd_train(const Options& o) {
  auto config = pipeline_config(o);
  for (const auto& s : o.skip_stages) {
    if (s == "general") config.plan.general_epochs = 0;
    else if (s == "search") config.plan.search_epochs = 0;
    else if (s == "supervised") config.plan.supervised_epochs = 0;
  }
  const auto index = load_index(o);
  StageData data;
  auto read_stage = [&](std::size_t epochs, const std::string& name,
                        std::vector<TrainingPair>& pairs) {
    if (epochs == 0) return;
    require_file(artifact(o, name), "training pairs");
    pairs = read_pairs_tsv(artifact(o, name), index);
  };
  read_stage(config.plan.general_epochs, "pairs_general.tsv", data.general);
  read_stage(config.plan.search_epochs, "pairs_search.tsv", data.search_oriented);
  read_stage(config.plan.supervised_epochs, "pairs_supervised.tsv", data.supervised);

  const auto model = train_model(data, index, config);
  model.scorer.save(artifact(o, "scorer.bin"));
  nlohmann::ordered_json report = nlohmann::ordered_json::array();
  for (const auto& stage : model.stages) {
    if (!stage.skipped) write_loss_trace(artifact(o, "loss_" + stage.name + ".csv"), stage.loss_trace);
    report.push_back({{"stage", stage.name},
                      {"skipped", stage.skipped},
                      {"epochs", stage.loss_trace.size()},
                      {"final_loss", stage.loss_trace.empty() ? 0.0 : stage.loss_trace.back()},
                      {"start_hash", hex(stage.start_hash)},
                      {"end_hash", hex(stage.end_hash)}});
    std::cout << stage.name << ": "
              << (stage.skipped ? std::string("skipped")
                                : std::to_string(stage.loss_trace.size()) + " epochs, loss " +
                                      std::to_string(stage.loss_trace.front()) + " -> " +
                                      std::to_string(stage.loss_trace.back()))
              << '\n';
  }
  write_text(artifact(o, "train.json"), report.dump(2) + "\n");
}

void cmd_retrieve(const Options& o) {
  require_file(artifact(o, "trie.bin"), "trie");
  require_file(artifact(o, "scorer.bin"), "scorer checkpoint");
  const auto trie = PrefixTrie::load(artifact(o, "trie.bin"));
  const auto scorer = LinearScorer::load(artifact(o, "scorer.bin"));
  const auto groups = load_query_groups(o.queries);
  std::vector<TokenSequence> queries;
  for (const auto& g : groups) queries.push_back(tokenize(g.query));
  const auto batch = retrieve_batch(scorer, trie, queries, o.beam, o.topk);
  write_retrieval_tsv(artifact(o, "retrieval.tsv"), batch.results);
  write_latency_json(artifact(o, "latency.json"), batch.latency);
  std::cout << queries.size() << " queries, mean " << batch.latency.mean_ms << " ms, median "
            << batch.latency.median_ms << " ms, p95 " << batch.latency.p95_ms << " ms\n";
}

void cmd_eval(const Options& o) {
  const auto groups = load_query_groups(o.qrels);
  require_file(artifact(o, "retrieval.tsv"), "retrieval output");
  const auto rankings = read_retrieval_tsv(artifact(o, "retrieval.tsv"), groups.size());
  std::vector<EvalRecord> records;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    GENRET_REQUIRE(!groups[i].relevant.empty(), ErrorKind::kData,
                   "query '" + groups[i].query + "' has no relevant document");
    records.push_back({groups[i].relevant, rankings[i]});
  }
  const auto report = evaluate(records);
  write_text(artifact(o, "metrics.json"), metric_json(report) + "\n");
  std::cout << metric_table({{"model", report}});
}

void cmd_analyze(const Options& o) {
  const auto corpus = load_checked(o.corpus);
  const auto index = load_index(o);
  check_aligned(corpus, index);
  const std::string emb_path = o.embeddings.empty() ? artifact(o, "embeddings.jsonl") : o.embeddings;
  require_file(emb_path, "embedding file");
  const auto emb = load_embeddings(emb_path, corpus);
  const auto result = prefix_similarity_analysis(index, emb, o.prefix_len, o.sample_n,
                                                 o.bin_width, derive_seed(o.seed, "analysis"));
  const double random = random_sample_similarity(emb, result.documents.size(),
                                                 derive_seed(o.seed, "random-sample"));
  write_histogram_csv(artifact(o, "histogram.csv"), result.histogram);
  nlohmann::ordered_json j;
  j["prefix"] = index.vocab.decode(result.prefix);
  j["qualifying_groups"] = result.group_count;
  j["sampled_documents"] = result.documents.size();
  j["pairs"] = result.histogram.pair_count();
  j["mean_similarity"] = result.mean_similarity;
  j["random_mean_similarity"] = random;
  write_text(artifact(o, "analysis.json"), j.dump(2) + "\n");
  std::cout << "prefix group of " << result.documents.size() << " documents, "
            << result.histogram.pair_count() << " pairs, mean cosine " << result.mean_similarity
            << " (random sample " << random << ")\n";
}

void cmd_ablate(const Options& o) {
  const auto corpus = load_checked(o.corpus);
  require_file(o.qrels, "training qrels");
  require_file(o.queries, "test qrels");
  const auto rows =
      ablation_run(corpus, read_qrels(o.qrels), read_qrels(o.queries), pipeline_config(o));
  std::vector<std::pair<std::string, MetricReport>> table;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    table.emplace_back(r.variant, r.report);
    j.push_back({{"variant", r.variant}, {"metrics", nlohmann::ordered_json::parse(metric_json(r.report))}});
  }
  write_text(artifact(o, "ablation.json"), j.dump(2) + "\n");
  write_text(artifact(o, "ablation.txt"), metric_table(table));
  std::cout << metric_table(table);
}

// Reads `key = value` lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    GENRET_REQUIRE(eq != std::string::npos, ErrorKind::kConfig,
                   path + ":" + std::to_string(line_no) + ": expected key = value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

std::string option_value(const CLI::Option* opt) {
  if (opt->count() > 0) {
    std::string joined;
    for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
    return joined;
  }
  const auto value = opt->get_default_str();
  return value == "{}" ? std::string() : value;
}

void print_effective(const CLI::App& app, const CLI::App* sub) {
  std::cout << "# effective config (" << sub->get_name() << ")\n";
  auto dump = [](const CLI::App* a) {
    for (const auto* opt : a->get_options()) {
      if (opt->get_lnames().empty() || opt->get_lnames()[0] == "help") continue;
      std::cout << opt->get_lnames()[0] << " = " << option_value(opt) << '\n';
    }
  };
  dump(&app);
  dump(sub);
  std::cout << std::flush;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Generative document retrieval: docids, staged training, constrained decoding."};
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the command name
  app.add_option("--config", o.config_path, "flat key = value config file");
  app.add_option("--seed", o.seed, "root seed");
  app.add_option("--out", o.out, "artifact directory");

  auto add_docid = [&](CLI::App* c) {
    c->add_option("--docid-kind", o.docid_kind, "keyword, pq or atomic")
        ->check(CLI::IsMember({"keyword", "url", "pq", "atomic"}));
    c->add_option("--title-length", o.title_length, "keyword docid title threshold L");
    c->add_option("--embed-dim", o.embed_dim, "embedding dimension D");
    c->add_option("--pq-groups", o.pq_groups, "PQ groups m");
    c->add_option("--pq-clusters", o.pq_clusters, "PQ centroids per group k");
    c->add_option("--kmeans-iters", o.kmeans_iters, "Lloyd iteration cap");
  };
  auto add_plan = [&](CLI::App* c) {
    c->add_option("--window", o.plan.window, "passage window s");
    c->add_option("--passages-per-doc", o.plan.passages_per_doc);
    c->add_option("--terms-per-doc", o.plan.term_seqs_per_doc);
    c->add_option("--key-terms", o.plan.key_term_count, "terms per key-term sequence");
    c->add_option("--pseudo-per-doc", o.plan.pseudo_queries_per_doc);
  };
  auto add_train = [&](CLI::App* c) {
    c->add_option("--general-epochs", o.plan.general_epochs);
    c->add_option("--search-epochs", o.plan.search_epochs);
    c->add_option("--supervised-epochs", o.plan.supervised_epochs);
    c->add_option("--lr", o.plan.lr);
    c->add_option("--feature-dim", o.feature_dim, "hashed feature rows F");
    c->add_option("--positions", o.positions, "position buckets P");
  };
  auto add_decode = [&](CLI::App* c) {
    c->add_option("--beam", o.beam, "beam width");
    c->add_option("--topk", o.topk, "results per query");
  };

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus with train/test qrels");
  synth->add_option("--docs", o.synth.docs);
  synth->add_option("--topics", o.synth.topics);
  synth->add_option("--body-length", o.synth.body_length);
  synth->add_option("--test-queries", o.synth.test_queries);
  synth->add_option("--alias-rate", o.synth.alias_rate);
  synth->add_option("--duplicate-fraction", o.synth.duplicate_fraction);

  auto* ingest = app.add_subcommand("ingest", "load and validate a corpus");
  ingest->add_option("--corpus", o.corpus, "JSON-lines corpus");

  auto* build = app.add_subcommand("build-docids", "assign docids and build the prefix trie");
  build->add_option("--corpus", o.corpus, "JSON-lines corpus");
  build->add_option("--embeddings", o.embeddings, "external embeddings (JSON lines)");
  add_docid(build);

  auto* gen = app.add_subcommand("gen-data", "generate training pairs for the three stages");
  gen->add_option("--corpus", o.corpus, "JSON-lines corpus");
  gen->add_option("--qrels", o.qrels, "supervised qrels TSV");
  gen->add_option("--pseudo-queries", o.pseudo_queries, "external pseudo queries (JSON lines)");
  add_plan(gen);

  auto* train_cmd = app.add_subcommand("train", "three-stage training of the scorer");
  add_train(train_cmd);
  train_cmd->add_option("--skip-stage", o.skip_stages, "general, search or supervised")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::IsMember({"general", "search", "supervised"}));

  auto* retrieve = app.add_subcommand("retrieve", "constrained beam search for each query");
  retrieve->add_option("--queries", o.queries, "queries TSV (first column)");
  add_decode(retrieve);

  auto* eval = app.add_subcommand("eval", "score retrieval output against qrels");
  eval->add_option("--qrels", o.qrels, "test qrels TSV");

  auto* analyze = app.add_subcommand("analyze", "docid prefix-similarity histogram");
  analyze->add_option("--corpus", o.corpus, "JSON-lines corpus");
  analyze->add_option("--embeddings", o.embeddings, "embeddings (default: <out>/embeddings.jsonl)");
  analyze->add_option("--prefix-len", o.prefix_len);
  analyze->add_option("--sample-n", o.sample_n);
  analyze->add_option("--bin-width", o.bin_width);

  auto* ablate = app.add_subcommand("ablate", "full model and stage-removed variants");
  ablate->add_option("--corpus", o.corpus, "JSON-lines corpus");
  ablate->add_option("--qrels", o.qrels, "training qrels TSV");
  ablate->add_option("--queries", o.queries, "test qrels TSV");
  add_docid(ablate);
  add_plan(ablate);
  add_train(ablate);
  add_decode(ablate);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Config entries become flags placed before the user's own, so the
    // user's win; keys the chosen command does not know are ignored.
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty()) {
      std::size_t sub_at = args.size();
      CLI::App* sub = nullptr;
      for (std::size_t i = 0; i < args.size() && !sub; ++i) {
        for (auto* s : app.get_subcommands({})) {
          if (s->get_name() == args[i]) {
            sub = s;
            sub_at = i;
          }
        }
      }
      std::vector<std::string> global, local;
      for (const auto& [key, value] : read_config(config_path)) {
        const std::string flag = "--" + key;
        if (key != "config" && app.get_option_no_throw(flag)) {
          global.push_back(flag + "=" + value);
        } else if (sub && sub->get_option_no_throw(flag)) {
          local.push_back(flag + "=" + value);
        }
      }
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(sub_at + 1, args.size())),
                  local.begin(), local.end());
      args.insert(args.begin(), global.begin(), global.end());
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  print_effective(app, sub);
  try {
    fs::create_directories(o.out);
    const std::string name = sub->get_name();
    if (name == "synth") cmd_synth(o);
    else if (name == "ingest") cmd_ingest(o);
    else if (name == "build-docids") cmd_build_docids(o);
    else if (name == "gen-data") cmd_gen_data(o);
    else if (name == "train") cmd_train(o);
    else if (name == "retrieve") cmd_retrieve(o);
    else if (name == "eval") cmd_eval(o);
    else if (name == "analyze") cmd_analyze(o);
    else if (name == "ablate") cmd_ablate(o);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
