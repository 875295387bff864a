#pragma once

// Autoregressive docid scoring: the contract the decoder consumes, and a
// hashed-feature log-linear reference model trained with teacher forcing.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "genret/common.h"
#include "genret/corpus.h"
#include "genret/training_pair.h"

namespace genret {

/// Scoring state for one input text. next_logprobs is const and may be
/// called concurrently.
class ScoringSession {
 public:
  virtual ~ScoringSession() = default;
  /// Writes log p(token | prefix, input) for every vocabulary token.
  virtual void next_logprobs(std::span<const TokenId> prefix, std::span<double> out) const = 0;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual std::unique_ptr<ScoringSession> session(const TokenSequence& input) const = 0;

  std::vector<double> next_logprobs(const TokenSequence& input,
                                    std::span<const TokenId> prefix) const;
};

/// Sparse feature counts, sorted by index, indices in [0, F).
using FeatureVector = std::vector<std::pair<std::uint32_t, double>>;

struct FeatureConfig {
  std::size_t feature_dim = std::size_t{1} << 18;  // F
  std::size_t positions = 64;                      // P
  std::uint64_t seed = 0;
};

/// Input unigrams and bigrams.
FeatureVector input_features(const TokenSequence& input, const FeatureConfig& config);
/// Last prefix token (or the start marker) and min(len(prefix), P - 1),
/// in that order; not merged.
FeatureVector prefix_features(std::span<const TokenId> prefix, const FeatureConfig& config);
/// Merged input and prefix features.
FeatureVector featurize(const TokenSequence& input, std::span<const TokenId> prefix,
                        const FeatureConfig& config);

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct TrainConfig {
  std::size_t epochs = 1;
  AdamWConfig adamw;
  std::uint64_t seed = 0;
};

/// Per-row gradient of one pair's teacher-forcing loss.
using SparseGradient = std::map<std::uint32_t, std::vector<double>>;

class LinearScorer final : public Scorer {
 public:
  LinearScorer(FeatureConfig features, std::size_t vocab_size);

  std::size_t vocab_size() const override { return vocab_size_; }
  std::unique_ptr<ScoringSession> session(const TokenSequence& input) const override;

  const FeatureConfig& features() const { return features_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> weights() { return weights_; }
  double& weight(std::size_t feature, std::size_t token) {
    return weights_[feature * vocab_size_ + token];
  }
  /// Hash of the weight bytes; identifies a checkpoint.
  std::uint64_t weights_hash() const;

  /// Sum over target positions (plus the sentinel) of -log p(y_i | y_<i, q)
  /// with gold prefixes. Fills `grad` when non-null.
  double pair_loss(const TokenSequence& input, std::span<const TokenId> target,
                   TokenId sentinel, SparseGradient* grad) const;

  /// Checkpoint: magic, version, F, V, P, seed, then row-major weights.
  void save(const std::string& path) const;
  static LinearScorer load(const std::string& path);

 private:
  friend class LinearSession;
  void add_row(std::uint32_t feature, double scale, std::span<double> logits) const;

  FeatureConfig features_;
  std::size_t vocab_size_;
  std::vector<double> weights_;
};

/// AdamW that updates only rows with a gradient in the current step
/// ("lazy" moments); bias correction uses the global step count.
class SparseAdamW {
 public:
  SparseAdamW(const AdamWConfig& config, std::size_t rows, std::size_t cols);
  void step(std::span<double> weights, const SparseGradient& grad);

 private:
  AdamWConfig config_;
  std::size_t cols_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Per-example AdamW over shuffled pairs; returns mean pair loss per epoch.
/// Throws kData when a target token is outside the vocabulary.
std::vector<double> train(LinearScorer& scorer, std::span<const TrainingPair> pairs,
                          TokenId sentinel, const TrainConfig& config);

void write_loss_trace(const std::string& path, const std::vector<double>& trace);

}  // namespace genret
