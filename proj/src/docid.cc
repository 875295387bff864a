#include "genret/docid.h"

#include <algorithm>
#include <set>

#include "genret/io.h"
#include "json.hpp"

namespace genret {

std::string_view to_string(DocidKind kind) {
  switch (kind) {
    case DocidKind::kKeyword: return "keyword";
    case DocidKind::kPq: return "pq";
    case DocidKind::kAtomic: return "atomic";
  }
  return "unknown";
}

DocidKind parse_docid_kind(std::string_view name) {
  if (name == "keyword" || name == "url") return DocidKind::kKeyword;
  if (name == "pq") return DocidKind::kPq;
  if (name == "atomic") return DocidKind::kAtomic;
  throw Error(ErrorKind::kParameter, "unknown docid kind '" + std::string(name) + "'");
}

DocidVocabulary::DocidVocabulary(DocidKind kind, std::vector<std::string> tokens)
    : kind_(kind), tokens_(std::move(tokens)) {
  tokens_.emplace_back(kSentinel);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const bool inserted = ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second;
    GENRET_REQUIRE(inserted, ErrorKind::kData,
                   "duplicate docid vocabulary token '" + tokens_[i] + "'");
  }
}

std::optional<TokenId> DocidVocabulary::id(std::string_view token) const {
  const auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> DocidVocabulary::content_tokens() const {
  return {tokens_.begin(), tokens_.end() - 1};
}

std::vector<TokenId> DocidVocabulary::encode(const RawDocid& raw) const {
  std::vector<TokenId> ids;
  ids.reserve(raw.size());
  for (const auto& t : raw) {
    const auto found = id(t);
    GENRET_REQUIRE(found.has_value(), ErrorKind::kData,
                   "docid token '" + t + "' is not in the vocabulary");
    ids.push_back(*found);
  }
  return ids;
}

RawDocid DocidVocabulary::decode(const std::vector<TokenId>& ids) const {
  RawDocid raw;
  raw.reserve(ids.size());
  for (auto t : ids) raw.push_back(token(t));
  return raw;
}

std::vector<std::string> url_segments(std::string_view url) {
  if (const auto scheme = url.find("://"); scheme != std::string_view::npos) {
    url.remove_prefix(scheme + 3);
  }
  if (const auto cut = url.find_first_of("?#"); cut != std::string_view::npos) {
    url = url.substr(0, cut);
  }
  std::vector<std::string> segments;
  for (auto& part : split(url, '/')) {
    if (!part.empty()) segments.push_back(std::move(part));
  }
  return segments;
}

RawDocid build_keyword_docid(const Document& doc, const KeywordDocidConfig& config) {
  GENRET_REQUIRE(!doc.url.empty() || !doc.title.empty(), ErrorKind::kData,
                 "document '" + doc.doc_key + "' has neither url nor title");
  const TokenSequence title = tokenize(doc.title);
  const auto segments = url_segments(doc.url);
  RawDocid docid;
  if (title.size() <= config.title_length_threshold && !segments.empty()) {
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
      for (auto& t : tokenize(*it)) docid.push_back(std::move(t));
    }
  } else {
    docid = title;
    if (!segments.empty()) {
      for (auto& t : tokenize(segments.front())) docid.push_back(std::move(t));
    }
  }
  GENRET_REQUIRE(!docid.empty(), ErrorKind::kData,
                 "document '" + doc.doc_key + "' yields an empty keyword docid");
  return docid;
}

std::vector<RawDocid> make_unique(std::vector<RawDocid> docids) {
  std::map<RawDocid, std::size_t> seen;
  std::vector<std::size_t> occurrence(docids.size());
  for (std::size_t i = 0; i < docids.size(); ++i) occurrence[i] = ++seen[docids[i]];
  for (std::size_t i = 0; i < docids.size(); ++i) {
    if (occurrence[i] > 1) docids[i].push_back("#" + std::to_string(occurrence[i]));
  }
  return docids;
}

std::size_t count_distinct(const std::vector<RawDocid>& docids) {
  return std::set<RawDocid>(docids.begin(), docids.end()).size();
}

std::size_t count_distinct(const std::vector<DocidSequence>& docids) {
  std::set<std::vector<TokenId>> distinct;
  for (const auto& d : docids) distinct.insert(d.tokens);
  return distinct.size();
}

DocidIndex make_docid_index(DocidKind kind, const Corpus& corpus,
                            const std::vector<RawDocid>& docids,
                            std::vector<std::string> base_tokens) {
  GENRET_REQUIRE(docids.size() == corpus.size(), ErrorKind::kParameter,
                 "docid list is not aligned with the corpus");
  const std::set<std::string, std::less<>> base(base_tokens.begin(), base_tokens.end());
  std::set<std::string> extra;
  for (const auto& d : docids) {
    GENRET_REQUIRE(!d.empty(), ErrorKind::kData, "empty docid");
    for (const auto& t : d) {
      if (!base.contains(t)) extra.insert(t);
    }
  }
  std::vector<std::string> tokens = std::move(base_tokens);
  tokens.insert(tokens.end(), extra.begin(), extra.end());

  DocidIndex index;
  index.vocab = DocidVocabulary(kind, std::move(tokens));
  index.docids.reserve(docids.size());
  for (std::size_t i = 0; i < docids.size(); ++i) {
    index.docids.push_back({index.vocab.encode(docids[i]), corpus.documents[i].doc_key});
  }
  GENRET_REQUIRE(count_distinct(index.docids) == index.docids.size(), ErrorKind::kData,
                 "docids are not unique");
  return index;
}

std::string atomic_token(std::size_t doc_index) {
  return "atomic_" + std::to_string(doc_index);
}

DocidIndex build_keyword_index(const Corpus& corpus, const KeywordDocidConfig& config) {
  std::vector<RawDocid> raw;
  raw.reserve(corpus.size());
  Diagnostics diagnostics;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    try {
      raw.push_back(build_keyword_docid(corpus.documents[i], config));
    } catch (const Error& e) {
      diagnostics.add(std::string(e.what()) + "; using an atomic docid");
      raw.push_back({atomic_token(i)});
    }
  }
  auto index = make_docid_index(DocidKind::kKeyword, corpus, make_unique(std::move(raw)));
  index.diagnostics = std::move(diagnostics);
  return index;
}

DocidIndex assign_atomic(const Corpus& corpus) {
  std::vector<RawDocid> raw;
  std::vector<std::string> tokens;
  raw.reserve(corpus.size());
  tokens.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    tokens.push_back(atomic_token(i));
    raw.push_back({tokens.back()});
  }
  return make_docid_index(DocidKind::kAtomic, corpus, raw, std::move(tokens));
}

void write_docids_tsv(const std::string& path, const DocidIndex& index) {
  auto out = open_output(path);
  for (const auto& d : index.docids) {
    out << d.doc_key << '\t' << join(index.vocab.decode(d.tokens), " ") << '\n';
  }
}

void write_vocabulary(const std::string& path, const DocidVocabulary& vocab) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(vocab.kind()));
  j["tokens"] = vocab.content_tokens();
  auto out = open_output(path);
  out << j.dump() << '\n';
}

DocidVocabulary read_vocabulary(const std::string& path) {
  auto in = open_input(path);
  try {
    const auto j = nlohmann::json::parse(in);
    return DocidVocabulary(parse_docid_kind(j.at("kind").get<std::string>()),
                           j.at("tokens").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, "malformed vocabulary '" + path + "': " + e.what());
  }
}

DocidIndex read_docid_index(const std::string& docids_path, const std::string& vocab_path) {
  DocidIndex index;
  index.vocab = read_vocabulary(vocab_path);
  std::size_t line = 0;
  for (const auto& row : read_tsv(docids_path)) {
    ++line;
    GENRET_REQUIRE(row.size() == 2, ErrorKind::kFormat,
                   docids_path + ":" + std::to_string(line) + ": expected 2 fields");
    RawDocid raw;
    for (auto& t : split(row[1], ' ')) {
      if (!t.empty()) raw.push_back(std::move(t));
    }
    index.docids.push_back({index.vocab.encode(raw), row[0]});
  }
  GENRET_REQUIRE(!index.docids.empty(), ErrorKind::kData, "'" + docids_path + "' is empty");
  return index;
}

}  // namespace genret
