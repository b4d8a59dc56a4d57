#ifndef XMODAL_TRAIN_HPP
#define XMODAL_TRAIN_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xmodal/data.hpp"
#include "xmodal/eval.hpp"
#include "xmodal/loss.hpp"
#include "xmodal/model.hpp"
#include "xmodal/similarity.hpp"

namespace xmodal {

struct TrainConfig {
  LossSpec loss{};
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 0;
  AdamConfig adam{};
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  std::uint64_t seed = 1;
  /// Learning rate is multiplied by lr_decay once, after epoch lr_decay_epoch
  /// (0 disables the decay).
  double lr_decay = 1.0;
  std::size_t lr_decay_epoch = 0;
};

/// Throws ConfigError describing the first problem found.
void validate(const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  /// Validation recall for K in {1, 5, 10}; K larger than the split is absent.
  std::optional<RecallReport> val;
  double mined_fraction = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// {"epoch":..,"mean_loss":..,"r1_i2t":..,...,"r10_t2i":..,"mined_fraction":..}
/// with every double printed at round-trip precision; missing recalls are null.
std::string to_json_line(const EpochRecord& record);

struct TrainResult {
  EncoderParams params;
  std::vector<EpochRecord> log;
};

/// One full forward/backward pass through encoders, similarity and loss.
struct StepResult {
  SimilarityMatrix sim;
  LossResult loss;
  EncoderGrads grads;
};
StepResult forward_backward(const EncoderParams& params, const Matrix& visual, const Matrix& text,
                            const LossSpec& spec);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Index batches for one epoch: a seeded permutation of 0..n-1 cut into
/// batch_size chunks; a trailing partial chunk is dropped.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, Rng rng);

/// Trains a dual encoder on the train split and evaluates the val split after
/// every epoch. Deterministic given (data, config).
TrainResult train(const FeaturePairSet& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Full-gallery similarity matrix of a feature set under `params`.
Matrix score_gallery(const EncoderParams& params, const FeaturePairSet& set);

/// Recall@K of `params` on `set`; Ks larger than the set are skipped.
RecallReport evaluate(const EncoderParams& params, const FeaturePairSet& set,
                      std::span<const std::size_t> ks = kDefaultKs);

}  // namespace xmodal

#endif  // XMODAL_TRAIN_HPP
