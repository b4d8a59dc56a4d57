#include "xmodal/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "xmodal/errors.hpp"
#include "xmodal/model.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/similarity.hpp"
#include "xmodal/train.hpp"

namespace xmodal {

namespace {

constexpr int kMaxRedraws = 10000;
constexpr double kInjectedScale = 1.0 + 1e-3;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform(lo, hi);
  return m;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// Largest relative error between an analytic gradient and central
// differences of `f`, perturbing every entry of `x` in turn.
template <typename Scalar>
double max_fd_error(Matrix& x, const Matrix& analytic, double h, Scalar&& f) {
  double worst = 0.0;
  auto values = x.values();
  auto grad = analytic.values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double saved = values[k];
    values[k] = saved + h;
    const double up = f();
    values[k] = saved - h;
    const double down = f();
    values[k] = saved;
    worst = std::max(worst, relative_error(grad[k], (up - down) / (2.0 * h)));
  }
  return worst;
}

LossResult analytic_loss(const Matrix& scores, const GradCheckConfig& config) {
  LossResult r = compute_loss(scores, config.loss);
  if (config.inject_bug)
    for (double& g : r.grad_scores.values()) g *= kInjectedScale;
  return r;
}

double check_similarity(const GradCheckConfig& config, Rng rng) {
  const std::size_t n = pick(rng, 2, 8);
  const std::size_t d = pick(rng, 1, 6);
  EmbeddingBatch visual{random_matrix(n, d, rng), Modality::visual};
  EmbeddingBatch text{random_matrix(n, d, rng), Modality::text};
  // Keep rows well away from the zero-norm guard.
  for (Matrix* m : {&visual.values, &text.values})
    for (std::size_t r = 0; r < n; ++r) m->row(r)[0] += m->row(r)[0] >= 0 ? 0.5 : -0.5;
  const Matrix weights = random_matrix(n, n, rng);

  const SimilarityMatrix sim = cosine_forward(visual, text);
  const EmbeddingGrads grads = cosine_backward(sim, weights);
  auto weighted_sum = [&] {
    const Matrix s = cosine_forward(visual, text).scores;
    double acc = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) acc += weights.values()[k] * s.values()[k];
    return acc;
  };
  return std::max(max_fd_error(visual.values, grads.visual, config.step, weighted_sum),
                  max_fd_error(text.values, grads.text, config.step, weighted_sum));
}

double check_loss(const GradCheckConfig& config, Rng rng) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const std::size_t n = pick(rng, 3, 8);
    Matrix scores = random_matrix(n, n, rng);
    if (boundary_distance(scores, config.loss) < config.min_boundary_distance) continue;
    const LossResult analytic = analytic_loss(scores, config);
    return max_fd_error(scores, analytic.grad_scores, config.step,
                        [&] { return compute_loss(scores, config.loss).value; });
  }
  throw NumericalError("grad-check: could not draw a similarity matrix away from loss boundaries");
}

double check_encoder(const GradCheckConfig& config, Rng rng) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const std::size_t n = pick(rng, 3, 6);
    const EncoderShape shape{pick(rng, 1, 5), pick(rng, 1, 5), pick(rng, 1, 4), 0};
    Rng init = rng.split(static_cast<std::uint64_t>(attempt));
    EncoderParams params = init_encoder(shape, init);
    const Matrix visual = random_matrix(n, shape.visual_dim, rng);
    const Matrix text = random_matrix(n, shape.text_dim, rng);

    const Embeddings emb = encode(params, visual, text);
    double smallest_norm = std::numeric_limits<double>::infinity();
    for (const Matrix* m : {&emb.visual.values, &emb.text.values})
      for (std::size_t r = 0; r < n; ++r) {
        double sq = 0.0;
        for (double x : m->row(r)) sq += x * x;
        smallest_norm = std::min(smallest_norm, std::sqrt(sq));
      }
    // Tiny embedding norms amplify the step into large score changes.
    if (smallest_norm < 0.05) continue;
    const SimilarityMatrix sim = cosine_forward(emb.visual, emb.text);
    if (boundary_distance(sim.scores, config.loss) < config.min_boundary_distance) continue;

    const LossResult loss = analytic_loss(sim.scores, config);
    const EmbeddingGrads emb_grads = cosine_backward(sim, loss.grad_scores);
    const EncoderGrads grads = encode_backward(params, visual, text, emb_grads.visual, emb_grads.text);

    auto scalar = [&] {
      const Embeddings e = encode(params, visual, text);
      return compute_loss(cosine_forward(e.visual, e.text).scores, config.loss).value;
    };
    double worst = 0.0;
    auto tensors = params.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t)
      worst = std::max(worst, max_fd_error(tensors[t].get(), grads.tensors[t], config.step, scalar));
    return worst;
  }
  throw NumericalError("grad-check: could not draw an encoder instance away from loss boundaries");
}

}  // namespace

double relative_error(double analytic, double numeric) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelErrFloor});
  return std::abs(analytic - numeric) / denom;
}

double boundary_distance(const Matrix& scores, const LossSpec& spec) {
  const std::size_t n = scores.rows();
  double dist = std::numeric_limits<double>::infinity();
  const bool poly = spec.kind != LossKind::triplet;
  const bool uses_max = spec.kind != LossKind::avg_poly;
  const MiningMask mask = poly ? negatives_for(scores, spec) : all_negatives(n);
  const double margin = spec.coefficients.mining_margin;

  for (bool by_column : {false, true}) {
    for (std::size_t k = 0; k < n; ++k) {
      auto at = [&](std::size_t x) { return by_column ? scores(x, k) : scores(k, x); };
      const double positive = at(k);
      double top = -std::numeric_limits<double>::infinity();
      double second = top;
      double neg_sum = 0.0;
      std::size_t count = 0;
      for (std::size_t x = 0; x < n; ++x) {
        if (x == k) continue;
        const double s = at(x);
        if (poly && spec.mining_enabled) dist = std::min(dist, std::abs(s - (positive - margin)));
        if (!(by_column ? mask.col(x, k) : mask.row(k, x))) continue;
        ++count;
        neg_sum += poly_eval(spec.coefficients.neg, s);
        if (s > top) {
          second = top;
          top = s;
        } else if (s > second) {
          second = s;
        }
      }
      if (count == 0) continue;
      if (uses_max && count > 1) dist = std::min(dist, top - second);
      double hinge = 0.0;
      switch (spec.kind) {
        case LossKind::triplet: hinge = top - positive + spec.triplet_margin; break;
        case LossKind::avg_poly:
          hinge = poly_eval(spec.coefficients.pos, positive) + neg_sum / static_cast<double>(count);
          break;
        case LossKind::max_poly:
          hinge = poly_eval(spec.coefficients.pos, positive) + poly_eval(spec.coefficients.neg, top);
          break;
      }
      dist = std::min(dist, std::abs(hinge));
    }
  }
  return dist;
}

GradCheckReport run_grad_check(const GradCheckConfig& config) {
  if (const auto report = validate_loss_spec(config.loss); !report.ok())
    throw ConfigError("grad-check: invalid loss configuration: " + report.summary());
  if (!(config.step > 0.0)) throw ConfigError("grad-check: finite-difference step must be > 0");

  const Rng root(config.seed);
  GradCheckReport report;
  report.trials = config.trials;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const Rng trial = root.split(t);
    report.similarity_max_rel_err = std::max(report.similarity_max_rel_err, check_similarity(config, trial.split(1)));
    report.loss_max_rel_err = std::max(report.loss_max_rel_err, check_loss(config, trial.split(2)));
    report.encoder_max_rel_err = std::max(report.encoder_max_rel_err, check_encoder(config, trial.split(3)));
  }
  report.similarity_ok = report.similarity_max_rel_err <= config.similarity_tolerance;
  report.loss_ok = report.loss_max_rel_err <= config.loss_tolerance;
  report.encoder_ok = report.encoder_max_rel_err <= config.encoder_tolerance;
  return report;
}

}  // namespace xmodal
