#ifndef XMODAL_MODEL_HPP
#define XMODAL_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "xmodal/matrix.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/similarity.hpp"

namespace xmodal {

/// Projection for one modality: x ↦ x W, or x ↦ tanh(x W1) W2 with a hidden layer.
struct Tower {
  std::vector<Matrix> weights;

  std::size_t input_dim() const { return weights.front().rows(); }
  std::size_t output_dim() const { return weights.back().cols(); }
  bool has_hidden() const { return weights.size() == 2; }
};

/// Dual encoder mapping both modalities into a shared embed_dim space.
struct EncoderParams {
  Tower visual;
  Tower text;

  std::size_t visual_dim() const { return visual.input_dim(); }
  std::size_t text_dim() const { return text.input_dim(); }
  std::size_t embed_dim() const { return visual.output_dim(); }
  std::size_t hidden_dim() const { return visual.has_hidden() ? visual.weights[0].cols() : 0; }

  /// Every weight matrix, visual tower first, in a fixed order.
  std::vector<std::reference_wrapper<Matrix>> tensors();
  std::vector<std::reference_wrapper<const Matrix>> tensors() const;

  friend bool operator==(const EncoderParams& a, const EncoderParams& b) {
    return a.visual.weights == b.visual.weights && a.text.weights == b.text.weights;
  }
};

struct EncoderShape {
  std::size_t visual_dim = 0;
  std::size_t text_dim = 0;
  std::size_t embed_dim = 16;
  /// 0 for purely linear towers.
  std::size_t hidden_dim = 0;
};

/// Entries i.i.d. uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
EncoderParams init_encoder(const EncoderShape& shape, Rng& rng);

struct Embeddings {
  EmbeddingBatch visual;
  EmbeddingBatch text;
};

/// Throws ConfigError when raw feature widths do not match the towers or the
/// two modalities have different row counts.
Embeddings encode(const EncoderParams& params, const Matrix& visual_raw, const Matrix& text_raw);

/// Same layout as EncoderParams::tensors().
struct EncoderGrads {
  std::vector<Matrix> tensors;
};

/// Parameter gradients given upstream gradients on the embeddings. For a
/// linear tower dW = xᵀ g; the hidden-layer case recomputes the forward pass.
EncoderGrads encode_backward(const EncoderParams& params, const Matrix& visual_raw,
                             const Matrix& text_raw, const Matrix& grad_visual_embed,
                             const Matrix& grad_text_embed);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed list of parameter tensors.
class Adam {
 public:
  Adam(const EncoderParams& params, AdamConfig config);

  /// One update. Throws NumericalError (before touching anything) if any
  /// gradient entry is non-finite, ConfigError on shape mismatch.
  void step(EncoderParams& params, const EncoderGrads& grads);

  std::uint64_t steps() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return config_; }
  void set_lr(double lr);
  const std::vector<Matrix>& first_moments() const noexcept { return m_; }
  const std::vector<Matrix>& second_moments() const noexcept { return v_; }

 private:
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::uint64_t step_ = 0;
};

}  // namespace xmodal

#endif  // XMODAL_MODEL_HPP
