#include "xmodal/train.hpp"

#include <cmath>
#include <string>

#include "json.hpp"

#include "xmodal/errors.hpp"
#include "xmodal/mining.hpp"
#include "xmodal/similarity.hpp"

namespace xmodal {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

}  // namespace

void validate(const TrainConfig& config) {
  if (const auto report = validate_loss_spec(config.loss); !report.ok())
    throw ConfigError("invalid loss configuration: " + report.summary());
  if (config.batch_size < 2) throw ConfigError("batch size must be >= 2");
  if (config.embed_dim < 1) throw ConfigError("embedding dimension must be >= 1");
  if (!(config.adam.lr > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(config.lr_decay > 0.0) || !std::isfinite(config.lr_decay))
    throw ConfigError("learning-rate decay factor must be > 0");
}

std::string to_json_line(const EpochRecord& record) {
  nlohmann::ordered_json j;
  j["epoch"] = record.epoch;
  j["mean_loss"] = record.mean_loss;
  for (std::size_t k : kDefaultKs) {
    for (bool i2t : {true, false}) {
      const std::string key = "r" + std::to_string(k) + (i2t ? "_i2t" : "_t2i");
      j[key] = nullptr;
      if (record.val) {
        const auto& side = i2t ? record.val->image_to_text : record.val->text_to_image;
        if (auto it = side.find(k); it != side.end()) j[key] = it->second;
      }
    }
  }
  j["mined_fraction"] = record.mined_fraction;
  return j.dump();
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, Rng rng) {
  const auto order = rng.permutation(n);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start + batch_size <= n; start += batch_size)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(start + batch_size));
  return batches;
}

StepResult forward_backward(const EncoderParams& params, const Matrix& visual, const Matrix& text,
                            const LossSpec& spec) {
  const Embeddings emb = encode(params, visual, text);
  StepResult out;
  out.sim = cosine_forward(emb.visual, emb.text);
  out.loss = compute_loss(out.sim.scores, spec);
  const EmbeddingGrads grads = cosine_backward(out.sim, out.loss.grad_scores);
  out.grads = encode_backward(params, visual, text, grads.visual, grads.text);
  return out;
}

Matrix score_gallery(const EncoderParams& params, const FeaturePairSet& set) {
  const Embeddings emb = encode(params, set.visual, set.text);
  return cosine_forward(emb.visual, emb.text).scores;
}

RecallReport evaluate(const EncoderParams& params, const FeaturePairSet& set,
                      std::span<const std::size_t> ks) {
  std::vector<std::size_t> usable;
  for (std::size_t k : ks)
    if (k >= 1 && k <= set.size()) usable.push_back(k);
  return recall_at_k(score_gallery(params, set), usable);
}

TrainResult train(const FeaturePairSet& data, const TrainConfig& config, const EpochCallback& on_epoch) {
  validate(config);
  data.validate();
  if (data.size() == 0) throw ConfigError("training data is empty");

  const FeaturePairSet train_set = data.subset(Split::train);
  const FeaturePairSet val_set = data.subset(Split::val);
  if (config.epochs > 0 && train_set.size() < config.batch_size) {
    throw ConfigError("train split has " + std::to_string(train_set.size()) +
                      " pairs, fewer than one batch of " + std::to_string(config.batch_size));
  }

  const Rng root(config.seed);
  Rng init_rng = root.split(kInitStream);
  TrainResult result{init_encoder({data.visual_dim(), data.text_dim(), config.embed_dim, config.hidden_dim},
                                  init_rng),
                     {}};
  Adam adam(result.params, config.adam);
  const Rng shuffle_root = root.split(kShuffleStream);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = epoch_batches(train_set.size(), config.batch_size, shuffle_root.split(epoch));
    double loss_sum = 0.0;
    double mined_sum = 0.0;
    for (const auto& batch : batches) {
      const Matrix visual = train_set.visual.gather_rows(batch);
      const Matrix text = train_set.text.gather_rows(batch);
      const StepResult step = forward_backward(result.params, visual, text, config.loss);
      adam.step(result.params, step.grads);
      loss_sum += step.loss.value;
      mined_sum += mine(step.sim.scores, config.loss.coefficients.mining_margin).mined_fraction();
    }
    if (config.lr_decay_epoch != 0 && epoch == config.lr_decay_epoch)
      adam.set_lr(adam.config().lr * config.lr_decay);

    EpochRecord record;
    record.epoch = epoch;
    const double nb = static_cast<double>(batches.size());
    record.mean_loss = loss_sum / nb;
    record.mined_fraction = mined_sum / nb;
    if (val_set.size() > 0) record.val = evaluate(result.params, val_set);
    if (!std::isfinite(record.mean_loss)) throw NumericalError("training loss became non-finite");
    result.log.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return result;
}

}  // namespace xmodal
