#pragma once

// Corpus loading, tokenization, passage windows and tf-idf term statistics.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "genret/common.h"

namespace genret {

/// Ordered lowercase terms; never holds empty or whitespace-bearing tokens.
using TokenSequence = std::vector<std::string>;

struct Document {
  std::string doc_key;
  std::string url;
  std::string title;
  std::string body;
  TokenSequence tokens;  // tokenize(body), cached at load
};

struct CorpusStats {
  std::size_t doc_count = 0;
  std::map<std::string, std::size_t, std::less<>> doc_frequency;

  /// ln(doc_count / df(term)); 0 for unknown terms.
  double idf(std::string_view term) const;
};

struct Corpus {
  std::vector<Document> documents;
  CorpusStats stats;

  std::size_t size() const { return documents.size(); }
  /// Index of the document with this key, or npos.
  std::size_t find(std::string_view doc_key) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  friend Corpus make_corpus(std::vector<Document> documents);
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct CorpusLoad {
  Corpus corpus;
  std::size_t skipped_empty = 0;
  std::size_t malformed = 0;
  Diagnostics diagnostics;
};

/// Lowercases and splits on whitespace and punctuation. Runs of letters and
/// digits form tokens; non-ASCII UTF-8 letters are kept inside tokens.
TokenSequence tokenize(std::string_view text);

CorpusStats compute_stats(const std::vector<Document>& documents);

/// Tokenizes each body, computes stats and the key index. Throws kData on a
/// duplicate key or an empty-token body and kParameter on an empty list.
Corpus make_corpus(std::vector<Document> documents);

/// Reads a JSON-lines corpus (`doc_key`, `url`, `title`, `body`). Malformed
/// lines and empty bodies are skipped and reported; duplicate keys, an
/// unreadable file, or zero valid documents are fatal.
CorpusLoad load_corpus(const std::string& path);

/// Non-overlapping windows of `window` tokens; the last one may be shorter.
std::vector<TokenSequence> segment_passages(const Document& doc, std::size_t window);

/// Number of windows segment_passages would produce.
std::size_t passage_count(const Document& doc, std::size_t window);

struct WeightedTerm {
  std::string term;
  double weight;
};

/// Every distinct body term with tf(t) * ln(N / df(t)), sorted by weight
/// descending then term ascending.
std::vector<WeightedTerm> rank_terms(const Document& doc, const CorpusStats& stats);

/// The first `n_terms` entries of rank_terms.
TokenSequence select_key_terms(const Document& doc, const CorpusStats& stats,
                               std::size_t n_terms);

}  // namespace genret
