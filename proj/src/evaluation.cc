#include "genret/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "genret/io.h"
#include "genret/rng.h"
#include "json.hpp"

namespace genret {

// Sums run in extended precision so that small fixtures land on the
// correctly rounded rational value.
double recall_at_k(const std::vector<EvalRecord>& records, std::size_t k) {
  GENRET_REQUIRE(k >= 1, ErrorKind::kParameter, "k must be >= 1");
  GENRET_REQUIRE(!records.empty(), ErrorKind::kParameter, "no evaluation records");
  long double total = 0.0L;
  for (const auto& r : records) {
    GENRET_REQUIRE(!r.relevant.empty(), ErrorKind::kData, "query with no relevant documents");
    std::set<std::string> hits;
    for (std::size_t i = 0; i < r.ranking.size() && i < k; ++i) {
      if (r.relevant.contains(r.ranking[i].doc_key)) hits.insert(r.ranking[i].doc_key);
    }
    total += static_cast<long double>(hits.size()) / static_cast<long double>(r.relevant.size());
  }
  return static_cast<double>(total / static_cast<long double>(records.size()));
}

double mrr_at_k(const std::vector<EvalRecord>& records, std::size_t k) {
  GENRET_REQUIRE(k >= 1, ErrorKind::kParameter, "k must be >= 1");
  GENRET_REQUIRE(!records.empty(), ErrorKind::kParameter, "no evaluation records");
  long double total = 0.0L;
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.ranking.size() && i < k; ++i) {
      if (r.relevant.contains(r.ranking[i].doc_key)) {
        total += 1.0L / static_cast<long double>(i + 1);
        break;
      }
    }
  }
  return static_cast<double>(total / static_cast<long double>(records.size()));
}

MetricReport evaluate(const std::vector<EvalRecord>& records) {
  MetricReport report;
  report.recall_1 = recall_at_k(records, 1);
  report.recall_5 = recall_at_k(records, 5);
  report.recall_10 = recall_at_k(records, 10);
  report.mrr_10 = mrr_at_k(records, 10);
  report.query_count = records.size();
  return report;
}

std::vector<QueryGroup> group_queries(
    const std::vector<std::pair<std::string, std::string>>& qrels) {
  std::vector<QueryGroup> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& [query, doc_key] : qrels) {
    auto [it, inserted] = index.emplace(query, groups.size());
    if (inserted) groups.push_back({query, {}});
    groups[it->second].relevant.insert(doc_key);
  }
  return groups;
}

std::string metric_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["query_count"] = report.query_count;
  j["recall@1"] = report.recall_1;
  j["recall@5"] = report.recall_5;
  j["recall@10"] = report.recall_10;
  j["mrr@10"] = report.mrr_10;
  return j.dump(2);
}

std::string metric_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::size_t width = 7;
  for (const auto& [name, r] : rows) width = std::max(width, name.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s %8s %8s %8s %8s %8s\n", static_cast<int>(width), "variant",
                "R@1", "R@5", "R@10", "MRR@10", "queries");
  out << buf;
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s %8.4f %8.4f %8.4f %8.4f %8zu\n",
                  static_cast<int>(width), name.c_str(), r.recall_1, r.recall_5, r.recall_10,
                  r.mrr_10, r.query_count);
    out << buf;
  }
  return out.str();
}

std::size_t Histogram::pair_count() const {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

Histogram make_histogram(const std::vector<double>& values, double bin_width) {
  GENRET_REQUIRE(bin_width > 0.0 && bin_width <= 2.0, ErrorKind::kParameter,
                 "bin width must be in (0, 2]");
  Histogram h;
  h.bin_width = bin_width;
  const auto bins = static_cast<std::size_t>(std::ceil(2.0 / bin_width - 1e-9));
  h.counts.assign(bins, 0);
  for (double v : values) {
    const double clamped = std::clamp(v, -1.0, 1.0);
    auto bin = static_cast<std::size_t>(std::floor((clamped + 1.0) / bin_width));
    ++h.counts[std::min(bin, bins - 1)];
  }
  return h;
}

void write_histogram_csv(const std::string& path, const Histogram& histogram) {
  auto out = open_output(path);
  out << "bin_low,bin_high,count\n";
  char buf[96];
  for (std::size_t b = 0; b < histogram.counts.size(); ++b) {
    const double low = histogram.low + static_cast<double>(b) * histogram.bin_width;
    const double high = std::min(1.0, low + histogram.bin_width);
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%zu\n", low, high, histogram.counts[b]);
    out << buf;
  }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<double> pairwise_cosine(const EmbeddingMatrix& emb,
                                    const std::vector<std::size_t>& docs) {
  std::vector<double> sims;
  sims.reserve(docs.size() * (docs.size() - (docs.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = i + 1; j < docs.size(); ++j) {
      sims.push_back(cosine_similarity(emb.row(docs[i]), emb.row(docs[j])));
    }
  }
  return sims;
}

namespace {

std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> items,
                                                    std::size_t n, Rng& rng) {
  rng.shuffle(items.begin(), items.end());
  if (items.size() > n) items.resize(n);
  std::sort(items.begin(), items.end());
  return items;
}

double mean(const std::vector<double>& values) {
  double total = 0.0;
  for (double v : values) total += v;
  return values.empty() ? 0.0 : total / static_cast<double>(values.size());
}

}  // namespace

PrefixSimilarity prefix_similarity_analysis(const DocidIndex& index, const EmbeddingMatrix& emb,
                                            std::size_t prefix_len, std::size_t sample_n,
                                            double bin_width, std::uint64_t seed) {
  GENRET_REQUIRE(prefix_len >= 1, ErrorKind::kParameter, "prefix length must be >= 1");
  GENRET_REQUIRE(sample_n >= 2, ErrorKind::kParameter, "sample size must be >= 2");
  GENRET_REQUIRE(emb.rows() == index.docids.size(), ErrorKind::kConfig,
                 "embeddings are not aligned with the docids");

  std::map<std::vector<TokenId>, std::vector<std::size_t>> groups;
  for (std::size_t d = 0; d < index.docids.size(); ++d) {
    const auto& tokens = index.docids[d].tokens;
    if (tokens.size() < prefix_len) continue;
    groups[std::vector<TokenId>(tokens.begin(),
                                tokens.begin() + static_cast<std::ptrdiff_t>(prefix_len))]
        .push_back(d);
  }
  std::vector<const std::pair<const std::vector<TokenId>, std::vector<std::size_t>>*> qualifying,
      full;
  for (const auto& g : groups) {
    if (g.second.size() >= 2) qualifying.push_back(&g);
    if (g.second.size() >= sample_n) full.push_back(&g);
  }
  GENRET_REQUIRE(!qualifying.empty(), ErrorKind::kData,
                 "no docid prefix of length " + std::to_string(prefix_len) +
                     " is shared by two documents");

  Rng rng(seed);
  const auto* chosen = qualifying.front();
  if (!full.empty()) {
    chosen = full[rng.below(full.size())];
  } else {
    for (const auto* g : qualifying) {
      if (g->second.size() > chosen->second.size()) chosen = g;
    }
  }

  PrefixSimilarity result;
  result.prefix = chosen->first;
  result.group_count = qualifying.size();
  result.documents = sample_without_replacement(chosen->second, sample_n, rng);
  const auto sims = pairwise_cosine(emb, result.documents);
  result.histogram = make_histogram(sims, bin_width);
  result.mean_similarity = mean(sims);
  return result;
}

double random_sample_similarity(const EmbeddingMatrix& emb, std::size_t sample_n,
                                std::uint64_t seed) {
  std::vector<std::size_t> all(emb.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Rng rng(seed);
  return mean(pairwise_cosine(emb, sample_without_replacement(std::move(all), sample_n, rng)));
}

}  // namespace genret
