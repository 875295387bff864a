#include "genret/synthetic.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "genret/io.h"
#include "genret/rng.h"
#include "json.hpp"

namespace genret {

namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
                                   "s", "t", "v", "z", "br", "st", "tr", "pl", "gr", "sh"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};

class WordFactory {
 public:
  explicit WordFactory(std::uint64_t seed) : rng_(seed) {}

  std::string fresh(std::size_t min_syllables, std::size_t max_syllables) {
    while (true) {
      const std::size_t n = min_syllables + rng_.below(max_syllables - min_syllables + 1);
      std::string w;
      for (std::size_t s = 0; s < n; ++s) {
        w += kOnsets[rng_.below(std::size(kOnsets))];
        w += kVowels[rng_.below(std::size(kVowels))];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng rng_;
  std::set<std::string> used_;
};

// Zipf-like pick over n items: weight 1 / (rank + 1).
std::size_t zipf(Rng& rng, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += 1.0 / static_cast<double>(i + 1);
  double target = rng.uniform() * total;
  for (std::size_t i = 0; i < n; ++i) {
    target -= 1.0 / static_cast<double>(i + 1);
    if (target < 0.0) return i;
  }
  return n - 1;
}

struct DocProfile {
  std::size_t topic;
  std::vector<std::string> favorites;
  std::vector<std::string> signature;
  std::string alias;  // query-side name never written in the body
};

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::string make_query(const DocProfile& p, const std::vector<std::string>& common,
                       double alias_rate, Rng& rng) {
  std::vector<std::string> words;
  // One or two signature words, one or two favorite topic words, sometimes
  // a common word; shuffled so queries are not verbatim document spans.
  const std::size_t sig = 1 + rng.below(2);
  std::vector<std::size_t> order(p.signature.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order.begin(), order.end());
  for (std::size_t i = 0; i < sig && i < order.size(); ++i) words.push_back(p.signature[order[i]]);
  if (rng.uniform() < alias_rate) words[rng.below(words.size())] = p.alias;
  const std::size_t fav = 1 + rng.below(2);
  for (std::size_t i = 0; i < fav; ++i) {
    words.push_back(p.favorites[rng.below(p.favorites.size())]);
  }
  if (rng.uniform() < 0.5) words.push_back(common[zipf(rng, common.size())]);
  rng.shuffle(words.begin(), words.end());
  return join(words, " ");
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& config) {
  GENRET_REQUIRE(config.docs >= 1 && config.topics >= 1 && config.topic_words >= 1 &&
                     config.common_words >= 1 && config.signature_words >= 1 &&
                     config.favorite_words >= 1 && config.body_length >= 1,
                 ErrorKind::kParameter, "synthetic corpus sizes must be >= 1");
  WordFactory words(derive_seed(config.seed, "words"));
  Rng rng(derive_seed(config.seed, "documents"));

  std::vector<std::string> common;
  for (std::size_t i = 0; i < config.common_words; ++i) common.push_back(words.fresh(1, 2));
  std::vector<std::string> topic_names;
  std::vector<std::vector<std::string>> topic_vocab(config.topics);
  for (std::size_t t = 0; t < config.topics; ++t) {
    topic_names.push_back(words.fresh(2, 3));
    for (std::size_t i = 0; i < config.topic_words; ++i) topic_vocab[t].push_back(words.fresh(2, 3));
  }

  SyntheticCorpus out;
  std::vector<DocProfile> profiles;
  for (std::size_t d = 0; d < config.docs; ++d) {
    DocProfile p;
    p.topic = rng.below(config.topics);
    const auto& vocab = topic_vocab[p.topic];
    for (std::size_t i = 0; i < config.favorite_words; ++i) {
      p.favorites.push_back(vocab[rng.below(vocab.size())]);
    }
    for (std::size_t i = 0; i < config.signature_words; ++i) p.signature.push_back(words.fresh(3, 4));
    p.alias = words.fresh(3, 4);

    std::vector<std::string> body;
    body.reserve(config.body_length);
    for (std::size_t i = 0; i < config.body_length; ++i) {
      const double u = rng.uniform();
      if (u < 0.45) {
        body.push_back(common[zipf(rng, common.size())]);
      } else if (u < 0.65) {
        body.push_back(vocab[rng.below(vocab.size())]);
      } else if (u < 0.88) {
        body.push_back(p.favorites[rng.below(p.favorites.size())]);
      } else {
        body.push_back(p.signature[rng.below(p.signature.size())]);
      }
    }

    Document doc;
    doc.doc_key = "D" + std::to_string(d);
    doc.title = capitalize(p.favorites[0]) + " " + capitalize(p.signature[0]) + " " +
                capitalize(p.signature[1 % p.signature.size()]);
    doc.url = "https://" + topic_names[p.topic] + ".example.org/" + p.favorites[1 % p.favorites.size()] +
              "/" + p.signature[0] + "_" + std::to_string(d);
    doc.body = join(body, " ");
    out.documents.push_back(std::move(doc));
    profiles.push_back(std::move(p));
  }

  if (config.duplicate_fraction > 0.0) {
    Rng dup(derive_seed(config.seed, "duplicates"));
    const auto n = static_cast<std::size_t>(
        std::floor(config.duplicate_fraction * static_cast<double>(config.docs)));
    for (std::size_t i = 0; i < n && config.docs > 1; ++i) {
      const std::size_t target = dup.below(config.docs);
      std::size_t source = dup.below(config.docs);
      if (source == target) source = (source + 1) % config.docs;
      out.documents[target].url = out.documents[source].url;
      out.documents[target].title = out.documents[source].title;
    }
  }

  Rng qrng(derive_seed(config.seed, "queries"));
  for (std::size_t d = 0; d < config.docs; ++d) {
    for (std::size_t q = 0; q < config.train_queries_per_doc; ++q) {
      out.train_qrels.push_back({make_query(profiles[d], common, config.alias_rate, qrng), out.documents[d].doc_key});
    }
  }
  std::vector<std::size_t> docs(config.docs);
  for (std::size_t d = 0; d < docs.size(); ++d) docs[d] = d;
  Rng trng(derive_seed(config.seed, "test-queries"));
  trng.shuffle(docs.begin(), docs.end());
  for (std::size_t i = 0; i < config.test_queries && i < docs.size(); ++i) {
    out.test_qrels.push_back(
        {make_query(profiles[docs[i]], common, config.alias_rate, trng), out.documents[docs[i]].doc_key});
  }
  return out;
}

void write_corpus_jsonl(const std::string& path, const std::vector<Document>& documents) {
  auto out = open_output(path);
  for (const auto& d : documents) {
    nlohmann::ordered_json j;
    j["doc_key"] = d.doc_key;
    j["url"] = d.url;
    j["title"] = d.title;
    j["body"] = d.body;
    out << j.dump() << '\n';
  }
}

}  // namespace genret
