#include "genret/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "json.hpp"

namespace genret {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kData: return "data";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

namespace {

// Decodes one UTF-8 code point starting at text[i]; advances i. Invalid
// bytes decode as themselves.
char32_t decode_utf8(std::string_view text, std::size_t& i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  int extra = 0;
  char32_t cp = b0;
  if (b0 >= 0xF0 && b0 < 0xF8) {
    extra = 3;
    cp = b0 & 0x07;
  } else if (b0 >= 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if (b0 >= 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  }
  if (b0 >= 0xF8 || i + extra >= text.size()) {
    extra = 0;
    cp = b0;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(text[i + k]);
    if ((b & 0xC0) != 0x80) {
      extra = 0;
      cp = b0;
      break;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  len = 1 + extra;
  return cp;
}

bool is_separator(char32_t cp) {
  if (cp < 0x80) {
    const auto c = static_cast<unsigned char>(cp);
    return !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
             (c >= '0' && c <= '9'));
  }
  // Latin-1 spaces, punctuation and symbols (letters start at U+00C0).
  if (cp >= 0x80 && cp <= 0xBF) return true;
  if (cp == 0xD7 || cp == 0xF7) return true;
  if (cp >= 0x2000 && cp <= 0x206F) return true;  // general punctuation
  if (cp >= 0x3000 && cp <= 0x303F) return true;  // CJK punctuation
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;  // fullwidth punctuation
  if (cp == 0x1680 || cp == 0xFEFF) return true;
  return false;
}

void append_lower(std::string& out, std::string_view text, std::size_t i,
                  std::size_t len, char32_t cp) {
  if (len == 1) {
    char c = text[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  } else if (len == 2 && cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) {
    const char32_t lower = cp + 0x20;
    out.push_back(static_cast<char>(0xC0 | (lower >> 6)));
    out.push_back(static_cast<char>(0x80 | (lower & 0x3F)));
  } else {
    out.append(text.substr(i, len));
  }
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = 1;
    const char32_t cp = decode_utf8(text, i, len);
    if (is_separator(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      append_lower(current, text, i, len, cp);
    }
    i += len;
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double CorpusStats::idf(std::string_view term) const {
  const auto it = doc_frequency.find(term);
  if (it == doc_frequency.end() || it->second == 0) return 0.0;
  return std::log(static_cast<double>(doc_count) / static_cast<double>(it->second));
}

std::size_t Corpus::find(std::string_view doc_key) const {
  const auto it = index_.find(doc_key);
  return it == index_.end() ? npos : it->second;
}

CorpusStats compute_stats(const std::vector<Document>& documents) {
  CorpusStats stats;
  stats.doc_count = documents.size();
  for (const auto& doc : documents) {
    std::vector<std::string_view> terms(doc.tokens.begin(), doc.tokens.end());
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (auto term : terms) {
      auto it = stats.doc_frequency.find(term);
      if (it == stats.doc_frequency.end()) {
        stats.doc_frequency.emplace(std::string(term), 1);
      } else {
        ++it->second;
      }
    }
  }
  return stats;
}

Corpus make_corpus(std::vector<Document> documents) {
  GENRET_REQUIRE(!documents.empty(), ErrorKind::kParameter, "corpus has no documents");
  Corpus corpus;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    auto& doc = documents[i];
    doc.tokens = tokenize(doc.body);
    GENRET_REQUIRE(!doc.tokens.empty(), ErrorKind::kData,
                   "document '" + doc.doc_key + "' has an empty body");
    const bool inserted = corpus.index_.emplace(doc.doc_key, i).second;
    GENRET_REQUIRE(inserted, ErrorKind::kData, "duplicate doc_key '" + doc.doc_key + "'");
  }
  corpus.stats = compute_stats(documents);
  corpus.documents = std::move(documents);
  return corpus;
}

CorpusLoad load_corpus(const std::string& path) {
  std::ifstream in(path);
  GENRET_REQUIRE(in.good(), ErrorKind::kIo, "cannot read corpus file '" + path + "'");

  CorpusLoad load;
  std::vector<Document> documents;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Document doc;
    try {
      const auto j = nlohmann::json::parse(line);
      doc.doc_key = j.at("doc_key").get<std::string>();
      doc.url = j.value("url", std::string());
      doc.title = j.value("title", std::string());
      doc.body = j.at("body").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      ++load.malformed;
      load.diagnostics.add(path + ":" + std::to_string(line_no) +
                           ": malformed record: " + e.what());
      continue;
    }
    doc.tokens = tokenize(doc.body);
    if (doc.tokens.empty()) {
      ++load.skipped_empty;
      load.diagnostics.add(path + ":" + std::to_string(line_no) + ": document '" +
                           doc.doc_key + "' has an empty body; skipped");
      continue;
    }
    const auto [it, inserted] = seen.emplace(doc.doc_key, line_no);
    GENRET_REQUIRE(inserted, ErrorKind::kData,
                   path + ":" + std::to_string(line_no) + ": duplicate doc_key '" +
                       doc.doc_key + "' (first seen on line " +
                       std::to_string(it->second) + ")");
    documents.push_back(std::move(doc));
  }
  GENRET_REQUIRE(!documents.empty(), ErrorKind::kData,
                 "corpus file '" + path + "' has no valid documents");
  load.corpus = make_corpus(std::move(documents));
  return load;
}

std::size_t passage_count(const Document& doc, std::size_t window) {
  GENRET_REQUIRE(window >= 1, ErrorKind::kParameter, "passage window must be >= 1");
  return (doc.tokens.size() + window - 1) / window;
}

std::vector<TokenSequence> segment_passages(const Document& doc, std::size_t window) {
  const std::size_t count = passage_count(doc, window);
  std::vector<TokenSequence> passages;
  passages.reserve(count);
  for (std::size_t start = 0; start < doc.tokens.size(); start += window) {
    const std::size_t end = std::min(start + window, doc.tokens.size());
    passages.emplace_back(doc.tokens.begin() + static_cast<std::ptrdiff_t>(start),
                          doc.tokens.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return passages;
}

std::vector<WeightedTerm> rank_terms(const Document& doc, const CorpusStats& stats) {
  std::unordered_map<std::string_view, std::size_t> tf;
  for (const auto& t : doc.tokens) ++tf[t];
  std::vector<WeightedTerm> ranked;
  ranked.reserve(tf.size());
  for (const auto& [term, count] : tf) {
    ranked.push_back({std::string(term), static_cast<double>(count) * stats.idf(term)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const WeightedTerm& a, const WeightedTerm& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.term < b.term;
  });
  return ranked;
}

TokenSequence select_key_terms(const Document& doc, const CorpusStats& stats,
                               std::size_t n_terms) {
  GENRET_REQUIRE(n_terms >= 1, ErrorKind::kParameter, "n_terms must be >= 1");
  auto ranked = rank_terms(doc, stats);
  TokenSequence out;
  for (std::size_t i = 0; i < ranked.size() && i < n_terms; ++i) {
    out.push_back(std::move(ranked[i].term));
  }
  return out;
}

}  // namespace genret
