#include "xmodal/loss.hpp"

#include <cmath>
#include <limits>

#include "xmodal/errors.hpp"

namespace xmodal {

namespace {

void require_batch(const Matrix& scores, const char* who) {
  if (scores.rows() != scores.cols())
    throw ConfigError(std::string(who) + ": similarity matrix must be square");
  if (scores.rows() < 2)
    throw ConfigError(std::string(who) + ": need at least 2 pairs per batch");
}

// Accessor that presents the column direction as if it were rows: anchor k
// in direction `by_column` sees entries (x, k) as its row.
struct DirectionView {
  const Matrix& scores;
  bool by_column;

  double at(std::size_t anchor, std::size_t other) const {
    return by_column ? scores(other, anchor) : scores(anchor, other);
  }
  std::size_t flat(std::size_t anchor, std::size_t other) const {
    return by_column ? other * scores.cols() + anchor : anchor * scores.cols() + other;
  }
};

enum class Reduction { mean, hardest };

LossResult poly_forward_backward(const Matrix& scores, const LossSpec& spec, Reduction reduction) {
  require_batch(scores, reduction == Reduction::mean ? "avg_poly" : "max_poly");
  const std::size_t n = scores.rows();
  const auto& pos = spec.coefficients.pos;
  const auto& neg = spec.coefficients.neg;
  const MiningMask mask = negatives_for(scores, spec);
  const double inv_n = 1.0 / static_cast<double>(n);

  LossResult out;
  out.grad_scores = Matrix(n, n);
  out.diagnostics.mined_per_visual_anchor.resize(n);
  out.diagnostics.mined_per_text_anchor.resize(n);
  auto grad = out.grad_scores.values();

  std::vector<std::size_t> mined;
  mined.reserve(n);
  for (bool by_column : {false, true}) {
    const DirectionView view{scores, by_column};
    auto& counts = by_column ? out.diagnostics.mined_per_text_anchor
                             : out.diagnostics.mined_per_visual_anchor;
    for (std::size_t k = 0; k < n; ++k) {
      mined.clear();
      for (std::size_t x = 0; x < n; ++x) {
        if (x == k) continue;
        if (by_column ? mask.col(x, k) : mask.row(k, x)) mined.push_back(x);
      }
      counts[k] = mined.size();
      if (mined.empty()) continue;

      const double positive = view.at(k, k);
      double negative_term = 0.0;
      std::size_t hardest = mined.front();
      if (reduction == Reduction::mean) {
        for (std::size_t x : mined) negative_term += poly_eval(neg, view.at(k, x));
        negative_term /= static_cast<double>(mined.size());
      } else {
        for (std::size_t x : mined)
          if (view.at(k, x) > view.at(k, hardest)) hardest = x;
        negative_term = poly_eval(neg, view.at(k, hardest));
      }

      const double term = poly_eval(pos, positive) + negative_term;
      if (!(term > 0.0)) continue;
      ++out.diagnostics.active_hinges;
      out.value += term * inv_n;
      grad[view.flat(k, k)] += poly_deriv_eval(pos, positive) * inv_n;
      if (reduction == Reduction::mean) {
        const double scale = inv_n / static_cast<double>(mined.size());
        for (std::size_t x : mined) grad[view.flat(k, x)] += poly_deriv_eval(neg, view.at(k, x)) * scale;
      } else {
        grad[view.flat(k, hardest)] += poly_deriv_eval(neg, view.at(k, hardest)) * inv_n;
      }
    }
  }
  if (!std::isfinite(out.value) || !out.grad_scores.all_finite())
    throw NumericalError("polynomial loss produced a non-finite value");
  return out;
}

}  // namespace

std::string_view to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::triplet: return "triplet";
    case LossKind::avg_poly: return "avg_poly";
    case LossKind::max_poly: return "max_poly";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "triplet") return LossKind::triplet;
  if (name == "avg_poly") return LossKind::avg_poly;
  if (name == "max_poly") return LossKind::max_poly;
  throw ConfigError("unknown loss kind '" + std::string(name) +
                    "' (expected triplet, avg_poly or max_poly)");
}

ValidationReport validate_loss_spec(const LossSpec& spec) {
  switch (spec.kind) {
    case LossKind::triplet: {
      ValidationReport report;
      if (!(spec.triplet_margin >= 0.0) || !std::isfinite(spec.triplet_margin))
        report.violations.emplace_back("triplet margin must be >= 0");
      return report;
    }
    case LossKind::avg_poly:
    case LossKind::max_poly:
      return validate_coefficients(spec.coefficients);
  }
  return {{"unknown loss kind"}};
}

MiningMask negatives_for(const Matrix& scores, const LossSpec& spec) {
  return spec.mining_enabled ? mine(scores, spec.coefficients.mining_margin)
                             : all_negatives(scores.rows());
}

LossResult triplet_forward_backward(const Matrix& scores, double margin) {
  require_batch(scores, "triplet");
  const std::size_t n = scores.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossResult out;
  out.grad_scores = Matrix(n, n);
  out.diagnostics.mined_per_visual_anchor.assign(n, n - 1);
  out.diagnostics.mined_per_text_anchor.assign(n, n - 1);
  auto grad = out.grad_scores.values();

  for (bool by_column : {false, true}) {
    const DirectionView view{scores, by_column};
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t hardest = k == 0 ? 1 : 0;
      for (std::size_t x = 0; x < n; ++x)
        if (x != k && view.at(k, x) > view.at(k, hardest)) hardest = x;
      const double hinge = view.at(k, hardest) - view.at(k, k) + margin;
      if (!(hinge > 0.0)) continue;
      ++out.diagnostics.active_hinges;
      out.value += hinge * inv_n;
      grad[view.flat(k, hardest)] += inv_n;
      grad[view.flat(k, k)] -= inv_n;
    }
  }
  if (!std::isfinite(out.value)) throw NumericalError("triplet loss produced a non-finite value");
  return out;
}

LossResult avg_poly_forward_backward(const Matrix& scores, const LossSpec& spec) {
  return poly_forward_backward(scores, spec, Reduction::mean);
}

LossResult max_poly_forward_backward(const Matrix& scores, const LossSpec& spec) {
  return poly_forward_backward(scores, spec, Reduction::hardest);
}

LossResult compute_loss(const Matrix& scores, const LossSpec& spec) {
  switch (spec.kind) {
    case LossKind::triplet: return triplet_forward_backward(scores, spec.triplet_margin);
    case LossKind::avg_poly: return avg_poly_forward_backward(scores, spec);
    case LossKind::max_poly: return max_poly_forward_backward(scores, spec);
  }
  throw ConfigError("compute_loss: unknown loss kind");
}

}  // namespace xmodal
