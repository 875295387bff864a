#pragma once

// Document identifiers: keyword (URL/title), semantic (product
// quantization, see pq.h) and atomic, plus the vocabulary they draw from.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "genret/common.h"
#include "genret/corpus.h"

namespace genret {

enum class DocidKind { kKeyword, kPq, kAtomic };

std::string_view to_string(DocidKind kind);
DocidKind parse_docid_kind(std::string_view name);

/// A docid before vocabulary assignment: plain token strings.
using RawDocid = std::vector<std::string>;

/// Bijection between docid token strings and ids. The end-of-docid sentinel
/// is always the last id.
class DocidVocabulary {
 public:
  static constexpr std::string_view kSentinel = "</d>";

  DocidVocabulary() = default;
  /// `tokens` must be distinct and must not contain the sentinel string.
  DocidVocabulary(DocidKind kind, std::vector<std::string> tokens);

  DocidKind kind() const { return kind_; }
  /// Vocabulary size including the sentinel.
  std::size_t size() const { return tokens_.size(); }
  TokenId sentinel() const { return static_cast<TokenId>(tokens_.size() - 1); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> id(std::string_view token) const;
  /// Tokens excluding the sentinel, in id order.
  std::vector<std::string> content_tokens() const;

  std::vector<TokenId> encode(const RawDocid& raw) const;
  RawDocid decode(const std::vector<TokenId>& ids) const;

 private:
  DocidKind kind_ = DocidKind::kAtomic;
  std::vector<std::string> tokens_;
  std::map<std::string, TokenId, std::less<>> ids_;
};

struct DocidSequence {
  std::vector<TokenId> tokens;
  std::string doc_key;
};

/// Collision-free docids for every document, aligned with corpus order.
struct DocidIndex {
  DocidVocabulary vocab;
  std::vector<DocidSequence> docids;
  Diagnostics diagnostics;
};

struct KeywordDocidConfig {
  std::size_t title_length_threshold = 2;
};

/// Splits a URL into its domain and path segments after stripping the
/// scheme, the query string and the fragment. Empty segments are dropped.
std::vector<std::string> url_segments(std::string_view url);

/// Reversed URL segments when the title has at most L tokens, otherwise the
/// title followed by the domain. Throws kData when the result is empty.
RawDocid build_keyword_docid(const Document& doc, const KeywordDocidConfig& config);

/// Appends "#2", "#3", ... to the second and later occurrences of a repeated
/// docid, in input order.
std::vector<RawDocid> make_unique(std::vector<RawDocid> docids);

/// Number of distinct token sequences.
std::size_t count_distinct(const std::vector<RawDocid>& docids);
std::size_t count_distinct(const std::vector<DocidSequence>& docids);

/// Assigns ids: `base_tokens` first in the given order, then every other
/// token of `docids` in ascending string order, then the sentinel.
DocidIndex make_docid_index(DocidKind kind, const Corpus& corpus,
                            const std::vector<RawDocid>& docids,
                            std::vector<std::string> base_tokens = {});

DocidIndex build_keyword_index(const Corpus& corpus, const KeywordDocidConfig& config);

/// One token per document, assigned in corpus order.
DocidIndex assign_atomic(const Corpus& corpus);

std::string atomic_token(std::size_t doc_index);

/// `doc_key<TAB>space-joined token strings`, one line per document.
void write_docids_tsv(const std::string& path, const DocidIndex& index);
void write_vocabulary(const std::string& path, const DocidVocabulary& vocab);
DocidVocabulary read_vocabulary(const std::string& path);
/// Reads a docid dump against an existing vocabulary.
DocidIndex read_docid_index(const std::string& docids_path, const std::string& vocab_path);

}  // namespace genret
