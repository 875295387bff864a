#include "genret/pq.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "genret/io.h"
#include "genret/rng.h"
#include "json.hpp"

namespace genret {

EmbeddingMatrix embed_documents(const Corpus& corpus, std::size_t dim, std::uint64_t seed,
                                ExecPolicy policy) {
  GENRET_REQUIRE(dim >= 2, ErrorKind::kParameter, "embedding dimension must be >= 2");

  // Basis row per corpus term, generated from (seed, term) alone so a
  // document's vector depends only on its content and the corpus statistics.
  std::vector<const std::string*> terms;
  std::unordered_map<std::string_view, std::uint32_t> term_index;
  terms.reserve(corpus.stats.doc_frequency.size());
  for (const auto& [term, df] : corpus.stats.doc_frequency) {
    term_index.emplace(term, static_cast<std::uint32_t>(terms.size()));
    terms.push_back(&term);
  }
  std::vector<double> basis(terms.size() * dim);
  parallel_for(
      terms.size(),
      [&](std::size_t t) {
        Rng rng(hash_bytes(*terms[t], seed));
        for (std::size_t c = 0; c < dim; ++c) basis[t * dim + c] = rng.normal();
      },
      policy);

  std::vector<SparseRow> rows(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::map<std::string_view, std::size_t> tf;
    for (const auto& t : corpus.documents[i].tokens) ++tf[t];
    SparseRow row;
    bool all_zero = true;
    for (const auto& [term, count] : tf) {
      const double w = static_cast<double>(count) * corpus.stats.idf(term);
      if (w != 0.0) all_zero = false;
      row.emplace_back(term_index.at(term), w);
    }
    if (all_zero) {
      for (auto& [index, w] : row) w = static_cast<double>(tf[*terms[index]]);
    }
    rows[i] = std::move(row);
  }

  EmbeddingMatrix emb;
  emb.dim = dim;
  emb.values.assign(corpus.size() * dim, 0.0);
  project_sparse(rows, basis, dim, emb.values, policy);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    double* v = emb.values.data() + i * dim;
    double norm = 0.0;
    for (std::size_t c = 0; c < dim; ++c) norm += v[c] * v[c];
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < dim; ++c) v[c] /= norm;
    emb.doc_keys.push_back(corpus.documents[i].doc_key);
  }
  return emb;
}

EmbeddingMatrix load_embeddings(const std::string& path, const Corpus& corpus) {
  auto in = open_input(path);
  std::unordered_map<std::string, std::vector<double>> by_key;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string key;
    std::vector<double> vec;
    try {
      const auto j = nlohmann::json::parse(line);
      key = j.at("doc_key").get<std::string>();
      vec = j.at("vector").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kFormat,
                  path + ":" + std::to_string(line_no) + ": malformed embedding: " + e.what());
    }
    if (dim == 0) dim = vec.size();
    GENRET_REQUIRE(vec.size() == dim && dim > 0, ErrorKind::kConfig,
                   path + ":" + std::to_string(line_no) + ": dimension mismatch for '" + key +
                       "' (" + std::to_string(vec.size()) + " vs " + std::to_string(dim) + ")");
    for (double x : vec) {
      GENRET_REQUIRE(std::isfinite(x), ErrorKind::kData,
                     "non-finite embedding component for '" + key + "'");
    }
    by_key[key] = std::move(vec);
  }
  EmbeddingMatrix emb;
  emb.dim = dim;
  emb.values.reserve(corpus.size() * dim);
  for (const auto& doc : corpus.documents) {
    const auto it = by_key.find(doc.doc_key);
    GENRET_REQUIRE(it != by_key.end(), ErrorKind::kData,
                   "embedding file '" + path + "' has no vector for '" + doc.doc_key + "'");
    emb.values.insert(emb.values.end(), it->second.begin(), it->second.end());
    emb.doc_keys.push_back(doc.doc_key);
  }
  return emb;
}

void save_embeddings(const std::string& path, const EmbeddingMatrix& emb) {
  auto out = open_output(path);
  for (std::size_t i = 0; i < emb.rows(); ++i) {
    const auto row = emb.row(i);
    nlohmann::json j;
    j["doc_key"] = emb.doc_keys[i];
    j["vector"] = std::vector<double>(row.begin(), row.end());
    out << j.dump() << '\n';
  }
}

namespace {

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double d = 0.0;
  for (std::size_t t = 0; t < dim; ++t) {
    const double diff = a[t] - b[t];
    d += diff * diff;
  }
  return d;
}

// k-means++ seeding over n points of `dim` values.
std::vector<double> kmeanspp_init(const std::vector<double>& points, std::size_t n,
                                  std::size_t dim, std::size_t k, Rng& rng) {
  std::vector<double> centroids(k * dim);
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    chosen[pick] = true;
    std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(pick * dim), dim,
                centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(&points[i * dim], &centroids[c * dim], dim));
      total += d2[i];
    }
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n;
      std::size_t last_positive = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        last_positive = i;
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    } else {
      // Fewer distinct points than clusters: any unchosen point.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) free.push_back(i);
      }
      pick = free[rng.below(free.size())];
    }
  }
  return centroids;
}

std::vector<double> kmeans_group(const std::vector<double>& points, std::size_t n,
                                 std::size_t dim, std::size_t k, std::uint64_t seed,
                                 std::size_t max_iters, ExecPolicy policy,
                                 std::vector<double>& trace) {
  Rng rng(seed);
  std::vector<double> centroids = kmeanspp_init(points, n, dim, k, rng);
  std::vector<std::uint32_t> assign(n), previous(n);
  std::vector<double> dist2(n);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    nearest_centroid(points, dim, centroids, k, assign, dist2, policy);
    double wcss = 0.0;
    for (double d : dist2) wcss += d;
    trace.push_back(wcss);
    if (iter > 0 && assign == previous) break;
    previous = assign;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t t = 0; t < dim; ++t) sums[assign[i] * dim + t] += points[i * dim + t];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t t = 0; t < dim; ++t) {
        centroids[c * dim + t] = sums[c * dim + t] / static_cast<double>(counts[c]);
      }
    }
    // Reseed empty clusters at the points farthest from their new centroid.
    bool any_empty = false;
    for (std::size_t c = 0; c < k; ++c) any_empty = any_empty || counts[c] == 0;
    if (!any_empty) continue;
    for (std::size_t i = 0; i < n; ++i) {
      dist2[i] = squared_distance(&points[i * dim], &centroids[assign[i] * dim], dim);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (dist2[i] > dist2[far]) far = i;
      }
      std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(far * dim), dim,
                  centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
      dist2[far] = -1.0;
    }
  }
  return centroids;
}

}  // namespace

PQCodebook train_codebook(const EmbeddingMatrix& emb, std::size_t m, std::size_t k,
                          std::uint64_t seed, std::size_t max_iters, ExecPolicy policy) {
  GENRET_REQUIRE(m >= 1 && emb.dim % m == 0, ErrorKind::kParameter,
                 "embedding dimension " + std::to_string(emb.dim) +
                     " is not divisible by m=" + std::to_string(m));
  GENRET_REQUIRE(k >= 1 && k <= emb.rows(), ErrorKind::kParameter,
                 "k=" + std::to_string(k) + " exceeds the document count " +
                     std::to_string(emb.rows()));
  GENRET_REQUIRE(max_iters >= 1, ErrorKind::kParameter, "max_iters must be >= 1");

  PQCodebook cb;
  cb.m = m;
  cb.k = k;
  cb.group_dim = emb.dim / m;
  cb.seed = seed;
  cb.centroids.resize(m * k * cb.group_dim);
  cb.wcss_trace.resize(m);

  const std::size_t n = emb.rows();
  std::vector<double> group(n * cb.group_dim);
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(emb.values.begin() + static_cast<std::ptrdiff_t>(i * emb.dim + g * cb.group_dim),
                  cb.group_dim,
                  group.begin() + static_cast<std::ptrdiff_t>(i * cb.group_dim));
    }
    const auto centroids =
        kmeans_group(group, n, cb.group_dim, k, derive_seed(seed, "pq-group-" + std::to_string(g)),
                     max_iters, policy, cb.wcss_trace[g]);
    std::copy(centroids.begin(), centroids.end(),
              cb.centroids.begin() + static_cast<std::ptrdiff_t>(g * k * cb.group_dim));
  }
  return cb;
}

std::vector<TokenId> encode_pq(std::span<const double> vector, const PQCodebook& codebook) {
  GENRET_REQUIRE(vector.size() == codebook.dim(), ErrorKind::kParameter,
                 "vector length " + std::to_string(vector.size()) + " does not match codebook dim " +
                     std::to_string(codebook.dim()));
  std::vector<TokenId> tokens(codebook.m);
  for (std::size_t g = 0; g < codebook.m; ++g) {
    std::uint32_t best = 0;
    double d = 0.0;
    nearest_centroid_serial(vector.subspan(g * codebook.group_dim, codebook.group_dim),
                            codebook.group_dim,
                            std::span(codebook.centroids).subspan(
                                g * codebook.k * codebook.group_dim, codebook.k * codebook.group_dim),
                            codebook.k, std::span(&best, 1), std::span(&d, 1));
    tokens[g] = static_cast<TokenId>(g * codebook.k + best);
  }
  return tokens;
}

std::string pq_token(std::size_t group, std::size_t cluster) {
  return "pq_" + std::to_string(group) + "_" + std::to_string(cluster);
}

DocidIndex build_pq_index(const Corpus& corpus, const EmbeddingMatrix& emb,
                          const PQCodebook& codebook) {
  GENRET_REQUIRE(emb.rows() == corpus.size(), ErrorKind::kConfig,
                 "embedding matrix is not aligned with the corpus");
  std::vector<std::string> base;
  base.reserve(codebook.token_count());
  for (std::size_t g = 0; g < codebook.m; ++g) {
    for (std::size_t c = 0; c < codebook.k; ++c) base.push_back(pq_token(g, c));
  }
  std::vector<RawDocid> raw(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) {
    for (TokenId t : encode_pq(emb.row(i), codebook)) raw[i].push_back(base[t]);
  });
  return make_docid_index(DocidKind::kPq, corpus, make_unique(std::move(raw)), std::move(base));
}

void save_codebook(const std::string& path, const PQCodebook& codebook) {
  nlohmann::json j;
  j["m"] = codebook.m;
  j["k"] = codebook.k;
  j["group_dim"] = codebook.group_dim;
  j["seed"] = codebook.seed;
  j["centroids"] = codebook.centroids;
  j["wcss_trace"] = codebook.wcss_trace;
  auto out = open_output(path);
  out << j.dump() << '\n';
}

PQCodebook load_codebook(const std::string& path) {
  auto in = open_input(path);
  try {
    const auto j = nlohmann::json::parse(in);
    PQCodebook cb;
    cb.m = j.at("m").get<std::size_t>();
    cb.k = j.at("k").get<std::size_t>();
    cb.group_dim = j.at("group_dim").get<std::size_t>();
    cb.seed = j.at("seed").get<std::uint64_t>();
    cb.centroids = j.at("centroids").get<std::vector<double>>();
    cb.wcss_trace = j.value("wcss_trace", std::vector<std::vector<double>>{});
    GENRET_REQUIRE(cb.centroids.size() == cb.m * cb.k * cb.group_dim, ErrorKind::kFormat,
                   "codebook '" + path + "' has the wrong centroid count");
    return cb;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, "malformed codebook '" + path + "': " + e.what());
  }
}

}  // namespace genret
