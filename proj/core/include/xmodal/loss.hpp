#ifndef XMODAL_LOSS_HPP
#define XMODAL_LOSS_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "xmodal/coefficients.hpp"
#include "xmodal/matrix.hpp"
#include "xmodal/mining.hpp"

namespace xmodal {

enum class LossKind { triplet, avg_poly, max_poly };

std::string_view to_string(LossKind kind) noexcept;
/// Accepts "triplet", "avg_poly", "max_poly". Throws ConfigError otherwise.
LossKind parse_loss_kind(std::string_view name);

struct LossSpec {
  LossKind kind = LossKind::max_poly;
  PolyCoefficients coefficients{};
  double triplet_margin = 0.2;
  /// When false the polynomial losses treat every negative as informative.
  bool mining_enabled = true;
};

/// Structural and weight-rule checks for a spec (coefficients are only
/// checked for the polynomial kinds).
ValidationReport validate_loss_spec(const LossSpec& spec);

struct LossDiagnostics {
  std::vector<std::size_t> mined_per_visual_anchor;
  std::vector<std::size_t> mined_per_text_anchor;
  std::size_t active_hinges = 0;
};

struct LossResult {
  /// Batch loss: sum over both directions of the per-direction anchor mean.
  double value = 0.0;
  /// dvalue/dS_ij.
  Matrix grad_scores;
  LossDiagnostics diagnostics;
};

/// Hardest-negative triplet loss in both directions:
///   (1/N) Σ_i [max_{j≠i} S_ij - S_ii + m]_+ + (1/N) Σ_j [max_{i≠j} S_ij - S_jj + m]_+.
/// Ties in the max go to the lowest index; a hinge at exactly 0 is inactive.
LossResult triplet_forward_backward(const Matrix& scores, double margin);

/// Polynomial loss averaging the weighted negatives of each anchor:
///   (1/N) Σ_i [f(S_ii) + mean_{j ∈ mined(i)} g(S_ij)]_+  (+ the column direction)
/// with f = Σ a_p s^p and g = Σ b_q s^q. Anchors with no mined negative add 0.
LossResult avg_poly_forward_backward(const Matrix& scores, const LossSpec& spec);

/// As avg_poly but each anchor keeps only its hardest mined negative:
///   (1/N) Σ_i [f(S_ii) + g(max_{j ∈ mined(i)} S_ij)]_+  (+ the column direction).
LossResult max_poly_forward_backward(const Matrix& scores, const LossSpec& spec);

/// Routes on spec.kind.
LossResult compute_loss(const Matrix& scores, const LossSpec& spec);

/// The mask a polynomial loss uses for `spec` (all negatives when mining is off).
MiningMask negatives_for(const Matrix& scores, const LossSpec& spec);

}  // namespace xmodal

#endif  // XMODAL_LOSS_HPP
