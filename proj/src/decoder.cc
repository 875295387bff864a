#include "genret/decoder.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "genret/io.h"
#include "json.hpp"

namespace genret {

namespace {

bool better(double score_a, const std::vector<TokenId>& a, double score_b,
            const std::vector<TokenId>& b) {
  if (score_a != score_b) return score_a > score_b;
  return a < b;
}

}  // namespace

RankedResult constrained_beam_search(const Scorer& scorer, const PrefixTrie& trie,
                                     const TokenSequence& query, std::size_t beam_width,
                                     std::size_t top_k) {
  GENRET_REQUIRE(top_k >= 1 && beam_width >= top_k, ErrorKind::kParameter,
                 "need beam_width >= top_k >= 1");
  GENRET_REQUIRE(!trie.empty(), ErrorKind::kData, "cannot decode over an empty trie");
  const std::size_t vocab = scorer.vocab_size();
  GENRET_REQUIRE(trie.sentinel() < vocab, ErrorKind::kConfig,
                 "trie sentinel is outside the scorer vocabulary");

  struct Active {
    Hypothesis hyp;
    PrefixTrie::NodeId node;
  };
  const auto session = scorer.session(query);
  std::vector<double> logp(vocab);
  std::vector<Active> beam{{Hypothesis{}, PrefixTrie::kRoot}};
  std::vector<Hypothesis> finished;
  auto by_rank = [](const Hypothesis& a, const Hypothesis& b) {
    return better(a.score, a.prefix, b.score, b.prefix);
  };

  while (!beam.empty()) {
    std::vector<Active> candidates;
    for (const auto& a : beam) {
      session->next_logprobs(a.hyp.prefix, logp);
      for (const auto& [token, child] : trie.children(a.node)) {
        Active next{a.hyp, child};
        next.hyp.prefix.push_back(token);
        next.hyp.score += logp[token];
        next.hyp.complete = token == trie.sentinel();
        candidates.push_back(std::move(next));
      }
    }
    const std::size_t keep = std::min(beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(),
                      [&](const Active& a, const Active& b) { return by_rank(a.hyp, b.hyp); });
    candidates.resize(keep);

    beam.clear();
    for (auto& c : candidates) {
      if (c.hyp.complete) {
        finished.push_back(std::move(c.hyp));
      } else {
        beam.push_back(std::move(c));
      }
    }
    std::sort(finished.begin(), finished.end(), by_rank);
    if (finished.size() >= beam_width) break;
    if (finished.size() >= top_k && !beam.empty()) {
      const double kth = finished[top_k - 1].score;
      double best_active = beam.front().hyp.score;
      for (const auto& a : beam) best_active = std::max(best_active, a.hyp.score);
      if (best_active < kth) break;
    }
  }

  RankedResult result;
  for (std::size_t i = 0; i < finished.size() && i < top_k; ++i) {
    std::vector<TokenId> docid(finished[i].prefix.begin(), finished[i].prefix.end() - 1);
    auto key = trie.lookup(docid);
    GENRET_REQUIRE(key.has_value(), ErrorKind::kData, "decoded docid is not in the trie");
    result.push_back({std::move(*key), finished[i].score, std::move(docid)});
  }
  return result;
}

double chain_logprob(const ScoringSession& session, std::span<const TokenId> docid,
                     TokenId sentinel, std::size_t vocab_size) {
  std::vector<TokenId> full(docid.begin(), docid.end());
  full.push_back(sentinel);
  std::vector<double> logp(vocab_size);
  double score = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    session.next_logprobs(std::span<const TokenId>(full).first(i), logp);
    score += logp[full[i]];
  }
  return score;
}

RankedResult brute_force_rank(const Scorer& scorer, const DocidIndex& index,
                              const TokenSequence& query, std::size_t top_k,
                              ExecPolicy policy) {
  GENRET_REQUIRE(top_k >= 1, ErrorKind::kParameter, "top_k must be >= 1");
  const auto session = scorer.session(query);
  const TokenId sentinel = index.vocab.sentinel();
  RankedResult all(index.docids.size());
  parallel_for(
      index.docids.size(),
      [&](std::size_t d) {
        const auto& docid = index.docids[d];
        all[d] = {docid.doc_key,
                  chain_logprob(*session, docid.tokens, sentinel, scorer.vocab_size()),
                  docid.tokens};
      },
      policy);
  // Comparing docids with the sentinel appended equals comparing the bare
  // token lists except when one is a proper prefix of the other: the shorter
  // one continues with the sentinel, the largest id.
  auto key = [sentinel](const std::vector<TokenId>& d) {
    std::vector<TokenId> full = d;
    full.push_back(sentinel);
    return full;
  };
  std::sort(all.begin(), all.end(), [&](const RankedEntry& a, const RankedEntry& b) {
    return better(a.score, key(a.docid), b.score, key(b.docid));
  });
  if (all.size() > top_k) all.resize(top_k);
  return all;
}

LatencyReport summarize_latency(std::vector<double> samples_ms) {
  LatencyReport report;
  report.count = samples_ms.size();
  if (samples_ms.empty()) return report;
  std::sort(samples_ms.begin(), samples_ms.end());
  double total = 0.0;
  for (double s : samples_ms) total += s;
  report.mean_ms = total / static_cast<double>(samples_ms.size());
  const std::size_t n = samples_ms.size();
  report.median_ms = n % 2 ? samples_ms[n / 2] : 0.5 * (samples_ms[n / 2 - 1] + samples_ms[n / 2]);
  const auto p95 = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  report.p95_ms = samples_ms[std::max<std::size_t>(p95, 1) - 1];
  return report;
}

BatchResult retrieve_batch(const Scorer& scorer, const PrefixTrie& trie,
                           const std::vector<TokenSequence>& queries, std::size_t beam_width,
                           std::size_t top_k, ExecPolicy policy) {
  BatchResult batch;
  batch.results.resize(queries.size());
  std::vector<double> latency(queries.size());
  parallel_for(
      queries.size(),
      [&](std::size_t q) {
        const auto start = std::chrono::steady_clock::now();
        batch.results[q] = constrained_beam_search(scorer, trie, queries[q], beam_width, top_k);
        const auto stop = std::chrono::steady_clock::now();
        latency[q] = std::chrono::duration<double, std::milli>(stop - start).count();
      },
      policy);
  batch.latency = summarize_latency(std::move(latency));
  return batch;
}

void write_retrieval_tsv(const std::string& path, const std::vector<RankedResult>& results) {
  auto out = open_output(path);
  char buf[64];
  for (std::size_t q = 0; q < results.size(); ++q) {
    for (std::size_t r = 0; r < results[q].size(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", results[q][r].score);
      out << q << '\t' << r + 1 << '\t' << results[q][r].doc_key << '\t' << buf << '\n';
    }
  }
}

std::vector<RankedResult> read_retrieval_tsv(const std::string& path, std::size_t query_count) {
  std::vector<RankedResult> results(query_count);
  std::size_t line = 0;
  for (const auto& row : read_tsv(path)) {
    ++line;
    GENRET_REQUIRE(row.size() == 4, ErrorKind::kFormat,
                   path + ":" + std::to_string(line) + ": expected 4 fields");
    std::size_t q = 0;
    double score = 0.0;
    try {
      q = std::stoul(row[0]);
      score = std::stod(row[3]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kFormat, path + ":" + std::to_string(line) + ": bad number");
    }
    GENRET_REQUIRE(q < query_count, ErrorKind::kFormat,
                   path + ":" + std::to_string(line) + ": query index out of range");
    results[q].push_back({row[2], score, {}});
  }
  return results;
}

void write_latency_json(const std::string& path, const LatencyReport& report) {
  nlohmann::json j;
  j["count"] = report.count;
  j["mean_ms"] = report.mean_ms;
  j["median_ms"] = report.median_ms;
  j["p95_ms"] = report.p95_ms;
  auto out = open_output(path);
  out << j.dump() << '\n';
}

}  // namespace genret
