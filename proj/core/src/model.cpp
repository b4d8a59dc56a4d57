#include "xmodal/model.hpp"

#include <cmath>
#include <string>

#include "xmodal/errors.hpp"

namespace xmodal {

namespace {

Matrix uniform_fan_in(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix w(fan_in, fan_out);
  for (double& x : w.values()) x = rng.uniform(-bound, bound);
  return w;
}

Tower init_tower(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  Tower t;
  if (hidden == 0) {
    t.weights.push_back(uniform_fan_in(in, out, rng));
  } else {
    t.weights.push_back(uniform_fan_in(in, hidden, rng));
    t.weights.push_back(uniform_fan_in(hidden, out, rng));
  }
  return t;
}

void check_input(const Tower& tower, const Matrix& raw, const char* which) {
  if (raw.cols() != tower.input_dim()) {
    throw ConfigError(std::string("encode: ") + which + " features have " +
                      std::to_string(raw.cols()) + " columns, encoder expects " +
                      std::to_string(tower.input_dim()));
  }
}

Matrix apply_tanh(Matrix m) {
  for (double& x : m.values()) x = std::tanh(x);
  return m;
}

Matrix forward(const Tower& tower, const Matrix& raw) {
  if (!tower.has_hidden()) return matmul(raw, tower.weights[0]);
  return matmul(apply_tanh(matmul(raw, tower.weights[0])), tower.weights[1]);
}

void backward(const Tower& tower, const Matrix& raw, const Matrix& grad_out,
              std::vector<Matrix>& out) {
  if (grad_out.rows() != raw.rows() || grad_out.cols() != tower.output_dim())
    throw ConfigError("encode_backward: upstream gradient shape mismatch");
  if (!tower.has_hidden()) {
    out.push_back(matmul_transposed_lhs(raw, grad_out));
    return;
  }
  const Matrix hidden = apply_tanh(matmul(raw, tower.weights[0]));
  Matrix grad_hidden = matmul_transposed_rhs(grad_out, tower.weights[1]);
  auto gh = grad_hidden.values();
  auto h = hidden.values();
  for (std::size_t k = 0; k < gh.size(); ++k) gh[k] *= 1.0 - h[k] * h[k];
  out.push_back(matmul_transposed_lhs(raw, grad_hidden));
  out.push_back(matmul_transposed_lhs(hidden, grad_out));
}

}  // namespace

std::vector<std::reference_wrapper<Matrix>> EncoderParams::tensors() {
  std::vector<std::reference_wrapper<Matrix>> out;
  for (auto& w : visual.weights) out.emplace_back(w);
  for (auto& w : text.weights) out.emplace_back(w);
  return out;
}

std::vector<std::reference_wrapper<const Matrix>> EncoderParams::tensors() const {
  std::vector<std::reference_wrapper<const Matrix>> out;
  for (const auto& w : visual.weights) out.emplace_back(w);
  for (const auto& w : text.weights) out.emplace_back(w);
  return out;
}

EncoderParams init_encoder(const EncoderShape& shape, Rng& rng) {
  if (shape.visual_dim == 0 || shape.text_dim == 0 || shape.embed_dim == 0)
    throw ConfigError("init_encoder: dimensions must be positive");
  Rng visual_rng = rng.split(1);
  Rng text_rng = rng.split(2);
  return {init_tower(shape.visual_dim, shape.hidden_dim, shape.embed_dim, visual_rng),
          init_tower(shape.text_dim, shape.hidden_dim, shape.embed_dim, text_rng)};
}

Embeddings encode(const EncoderParams& params, const Matrix& visual_raw, const Matrix& text_raw) {
  check_input(params.visual, visual_raw, "visual");
  check_input(params.text, text_raw, "text");
  if (visual_raw.rows() != text_raw.rows())
    throw ConfigError("encode: " + std::to_string(visual_raw.rows()) + " visual rows vs " +
                      std::to_string(text_raw.rows()) + " text rows");
  return {{forward(params.visual, visual_raw), Modality::visual},
          {forward(params.text, text_raw), Modality::text}};
}

EncoderGrads encode_backward(const EncoderParams& params, const Matrix& visual_raw,
                             const Matrix& text_raw, const Matrix& grad_visual_embed,
                             const Matrix& grad_text_embed) {
  check_input(params.visual, visual_raw, "visual");
  check_input(params.text, text_raw, "text");
  EncoderGrads grads;
  backward(params.visual, visual_raw, grad_visual_embed, grads.tensors);
  backward(params.text, text_raw, grad_text_embed, grads.tensors);
  return grads;
}

Adam::Adam(const EncoderParams& params, AdamConfig config) : config_(config) {
  if (!(config_.lr > 0.0)) throw ConfigError("Adam: learning rate must be > 0");
  if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0) || !(config_.beta2 >= 0.0 && config_.beta2 < 1.0))
    throw ConfigError("Adam: betas must lie in [0, 1)");
  if (!(config_.eps > 0.0)) throw ConfigError("Adam: eps must be > 0");
  for (const Matrix& p : params.tensors()) {
    m_.emplace_back(p.rows(), p.cols());
    v_.emplace_back(p.rows(), p.cols());
  }
}

void Adam::set_lr(double lr) {
  if (!(lr > 0.0)) throw ConfigError("Adam: learning rate must be > 0");
  config_.lr = lr;
}

void Adam::step(EncoderParams& params, const EncoderGrads& grads) {
  auto tensors = params.tensors();
  if (grads.tensors.size() != tensors.size() || tensors.size() != m_.size())
    throw ConfigError("Adam::step: parameter/gradient count mismatch");
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    if (!grads.tensors[t].same_shape(tensors[t].get()) || !m_[t].same_shape(tensors[t].get()))
      throw ConfigError("Adam::step: gradient shape mismatch on tensor " + std::to_string(t));
    if (!grads.tensors[t].all_finite())
      throw NumericalError("Adam::step: non-finite gradient in tensor " + std::to_string(t));
  }

  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    auto p = tensors[k].get().values();
    auto g = grads.tensors[k].values();
    auto m = m_[k].values();
    auto v = v_[k].values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
  for (const Matrix& p : params.tensors())
    if (!p.all_finite()) throw NumericalError("Adam::step: parameters became non-finite");
}

}  // namespace xmodal
