#include "genret/scorer.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "genret/io.h"
#include "genret/kernels.h"
#include "genret/rng.h"

namespace genret {

std::vector<double> Scorer::next_logprobs(const TokenSequence& input,
                                          std::span<const TokenId> prefix) const {
  std::vector<double> out(vocab_size());
  session(input)->next_logprobs(prefix, out);
  return out;
}

namespace {

constexpr char kUnigram = 'u';
constexpr char kBigram = 'b';
constexpr char kLast = 'l';
constexpr char kPosition = 'p';
constexpr char kSep = '\x1f';

std::uint32_t feature_index(char kind, std::string_view a, std::string_view b,
                            const FeatureConfig& config) {
  std::string key;
  key.reserve(a.size() + b.size() + 3);
  key.push_back(kind);
  key.push_back(kSep);
  key.append(a);
  if (!b.empty()) {
    key.push_back(kSep);
    key.append(b);
  }
  return static_cast<std::uint32_t>(hash_bytes(key, config.seed) % config.feature_dim);
}

FeatureVector merge(FeatureVector features) {
  std::sort(features.begin(), features.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  FeatureVector merged;
  for (const auto& f : features) {
    if (!merged.empty() && merged.back().first == f.first) {
      merged.back().second += f.second;
    } else {
      merged.push_back(f);
    }
  }
  return merged;
}

}  // namespace

FeatureVector input_features(const TokenSequence& input, const FeatureConfig& config) {
  FeatureVector features;
  features.reserve(input.size() * 2);
  for (std::size_t i = 0; i < input.size(); ++i) {
    features.emplace_back(feature_index(kUnigram, input[i], {}, config), 1.0);
    if (i + 1 < input.size()) {
      features.emplace_back(feature_index(kBigram, input[i], input[i + 1], config), 1.0);
    }
  }
  return merge(std::move(features));
}

FeatureVector prefix_features(std::span<const TokenId> prefix, const FeatureConfig& config) {
  const std::string last = prefix.empty() ? std::string("^") : std::to_string(prefix.back());
  const std::size_t pos = std::min(prefix.size(), config.positions - 1);
  return {{feature_index(kLast, last, {}, config), 1.0},
          {feature_index(kPosition, std::to_string(pos), {}, config), 1.0}};
}

FeatureVector featurize(const TokenSequence& input, std::span<const TokenId> prefix,
                        const FeatureConfig& config) {
  FeatureVector all = input_features(input, config);
  const auto tail = prefix_features(prefix, config);
  all.insert(all.end(), tail.begin(), tail.end());
  return merge(std::move(all));
}

LinearScorer::LinearScorer(FeatureConfig features, std::size_t vocab_size)
    : features_(features), vocab_size_(vocab_size) {
  GENRET_REQUIRE(features_.feature_dim >= 1 && features_.positions >= 1 && vocab_size_ >= 1,
                 ErrorKind::kConfig, "scorer dimensions F, V, P must all be >= 1");
  weights_.assign(features_.feature_dim * vocab_size_, 0.0);
}

void LinearScorer::add_row(std::uint32_t feature, double scale,
                           std::span<double> logits) const {
  const double* row = weights_.data() + static_cast<std::size_t>(feature) * vocab_size_;
  for (std::size_t v = 0; v < vocab_size_; ++v) logits[v] += scale * row[v];
}

// Input-feature logits are summed once per query; each prefix adds its two
// prefix-feature rows and normalizes.
class LinearSession final : public ScoringSession {
 public:
  LinearSession(const LinearScorer& scorer, const TokenSequence& input)
      : scorer_(scorer), base_(scorer.vocab_size_, 0.0) {
    for (const auto& [feature, count] : input_features(input, scorer.features_)) {
      scorer_.add_row(feature, count, base_);
    }
  }

  void next_logprobs(std::span<const TokenId> prefix, std::span<double> out) const override {
    GENRET_REQUIRE(out.size() == base_.size(), ErrorKind::kConfig,
                   "log-prob buffer does not match the vocabulary size");
    std::copy(base_.begin(), base_.end(), out.begin());
    for (const auto& [feature, count] : prefix_features(prefix, scorer_.features_)) {
      scorer_.add_row(feature, count, out);
    }
    log_softmax(out);
  }

 private:
  const LinearScorer& scorer_;
  std::vector<double> base_;
};

std::unique_ptr<ScoringSession> LinearScorer::session(const TokenSequence& input) const {
  return std::make_unique<LinearSession>(*this, input);
}

std::uint64_t LinearScorer::weights_hash() const {
  return hash_bytes(std::string_view(reinterpret_cast<const char*>(weights_.data()),
                                     weights_.size() * sizeof(double)));
}

double LinearScorer::pair_loss(const TokenSequence& input, std::span<const TokenId> target,
                               TokenId sentinel, SparseGradient* grad) const {
  const LinearSession session(*this, input);
  std::vector<TokenId> gold(target.begin(), target.end());
  gold.push_back(sentinel);

  std::vector<double> logp(vocab_size_);
  std::vector<double> input_grad;
  if (grad) input_grad.assign(vocab_size_, 0.0);
  // Extended precision keeps the sum of equal terms exact (len * ln V at
  // zero weights).
  long double loss = 0.0L;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto prefix = std::span<const TokenId>(gold).first(i);
    session.next_logprobs(prefix, logp);
    loss -= logp[gold[i]];
    if (!grad) continue;
    // d(-log p_y)/d logits = softmax - onehot(y)
    std::vector<double> g(vocab_size_);
    for (std::size_t v = 0; v < vocab_size_; ++v) g[v] = std::exp(logp[v]);
    g[gold[i]] -= 1.0;
    for (std::size_t v = 0; v < vocab_size_; ++v) input_grad[v] += g[v];
    for (const auto& [feature, count] : prefix_features(prefix, features_)) {
      auto& row = (*grad)[feature];
      if (row.empty()) row.assign(vocab_size_, 0.0);
      for (std::size_t v = 0; v < vocab_size_; ++v) row[v] += count * g[v];
    }
  }
  if (grad) {
    for (const auto& [feature, count] : input_features(input, features_)) {
      auto& row = (*grad)[feature];
      if (row.empty()) row.assign(vocab_size_, 0.0);
      for (std::size_t v = 0; v < vocab_size_; ++v) row[v] += count * input_grad[v];
    }
  }
  return static_cast<double>(loss);
}

namespace {

constexpr char kCheckpointMagic[4] = {'G', 'R', 'S', 'C'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  GENRET_REQUIRE(in.good(), ErrorKind::kFormat, "truncated checkpoint '" + path + "'");
  return value;
}

}  // namespace

void LinearScorer::save(const std::string& path) const {
  auto out = open_output(path, true);
  out.write(kCheckpointMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, features_.feature_dim);
  put<std::uint64_t>(out, vocab_size_);
  put<std::uint64_t>(out, features_.positions);
  put<std::uint64_t>(out, features_.seed);
  out.write(reinterpret_cast<const char*>(weights_.data()),
            static_cast<std::streamsize>(weights_.size() * sizeof(double)));
  GENRET_REQUIRE(out.good(), ErrorKind::kIo, "failed writing checkpoint '" + path + "'");
}

LinearScorer LinearScorer::load(const std::string& path) {
  auto in = open_input(path, true);
  char magic[4];
  in.read(magic, 4);
  GENRET_REQUIRE(in.good() && std::memcmp(magic, kCheckpointMagic, 4) == 0, ErrorKind::kFormat,
                 "'" + path + "' is not a scorer checkpoint");
  const auto version = get<std::uint32_t>(in, path);
  GENRET_REQUIRE(version == kCheckpointVersion, ErrorKind::kFormat,
                 "unsupported checkpoint version " + std::to_string(version));
  FeatureConfig features;
  features.feature_dim = get<std::uint64_t>(in, path);
  const auto vocab = get<std::uint64_t>(in, path);
  features.positions = get<std::uint64_t>(in, path);
  features.seed = get<std::uint64_t>(in, path);
  LinearScorer scorer(features, vocab);
  in.read(reinterpret_cast<char*>(scorer.weights_.data()),
          static_cast<std::streamsize>(scorer.weights_.size() * sizeof(double)));
  GENRET_REQUIRE(in.good(), ErrorKind::kFormat, "truncated checkpoint '" + path + "'");
  return scorer;
}

SparseAdamW::SparseAdamW(const AdamWConfig& config, std::size_t rows, std::size_t cols)
    : config_(config), cols_(cols), m_(rows), v_(rows) {
  GENRET_REQUIRE(config.lr > 0.0, ErrorKind::kParameter, "learning rate must be > 0");
}

void SparseAdamW::step(std::span<double> weights, const SparseGradient& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const double decay = 1.0 - config_.lr * config_.weight_decay;
  for (const auto& [row, g] : grad) {
    auto& m = m_[row];
    auto& v = v_[row];
    if (m.empty()) {
      m.assign(cols_, 0.0);
      v.assign(cols_, 0.0);
    }
    double* w = weights.data() + static_cast<std::size_t>(row) * cols_;
    for (std::size_t c = 0; c < cols_; ++c) {
      m[c] = config_.beta1 * m[c] + (1.0 - config_.beta1) * g[c];
      v[c] = config_.beta2 * v[c] + (1.0 - config_.beta2) * g[c] * g[c];
      w[c] *= decay;
      w[c] -= config_.lr * (m[c] / c1) / (std::sqrt(v[c] / c2) + config_.eps);
    }
  }
}

std::vector<double> train(LinearScorer& scorer, std::span<const TrainingPair> pairs,
                          TokenId sentinel, const TrainConfig& config) {
  GENRET_REQUIRE(config.adamw.lr > 0.0, ErrorKind::kParameter, "learning rate must be > 0");
  GENRET_REQUIRE(sentinel < scorer.vocab_size(), ErrorKind::kConfig,
                 "sentinel id is outside the scorer vocabulary");
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (TokenId t : pairs[p].target) {
      GENRET_REQUIRE(t < scorer.vocab_size() && t != sentinel, ErrorKind::kData,
                     "training pair " + std::to_string(p) + " (doc '" + pairs[p].doc_key +
                         "') has out-of-vocabulary target token " + std::to_string(t));
    }
  }

  SparseAdamW optimizer(config.adamw, scorer.features().feature_dim, scorer.vocab_size());
  std::vector<std::size_t> order(pairs.size());
  std::vector<double> trace;
  SparseGradient grad;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(config.seed, "epoch-" + std::to_string(epoch)));
    rng.shuffle(order.begin(), order.end());
    double total = 0.0;
    for (std::size_t idx : order) {
      grad.clear();
      total += scorer.pair_loss(pairs[idx].input, pairs[idx].target, sentinel, &grad);
      optimizer.step(scorer.weights(), grad);
    }
    trace.push_back(pairs.empty() ? 0.0 : total / static_cast<double>(pairs.size()));
  }
  return trace;
}

void write_loss_trace(const std::string& path, const std::vector<double>& trace) {
  auto out = open_output(path);
  out.precision(17);
  out << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) out << e + 1 << ',' << trace[e] << '\n';
}

}  // namespace genret
