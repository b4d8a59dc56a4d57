#ifndef XMODAL_GRADCHECK_HPP
#define XMODAL_GRADCHECK_HPP

#include <cstddef>
#include <cstdint>

#include "xmodal/loss.hpp"
#include "xmodal/matrix.hpp"

namespace xmodal {

/// Finite-difference verification of the three analytic gradient stages:
/// cosine similarity w.r.t. raw embeddings, each loss w.r.t. the scores, and
/// the whole encoder -> similarity -> loss chain w.r.t. encoder weights.
struct GradCheckConfig {
  LossSpec loss{};
  std::size_t trials = 100;
  std::uint64_t seed = 3;
  double step = 1e-5;
  double similarity_tolerance = 1e-5;
  double loss_tolerance = 1e-5;
  double encoder_tolerance = 1e-4;
  /// Instances closer than this to a hinge, mining or argmax boundary are redrawn.
  double min_boundary_distance = 1e-3;
  /// Test hook: perturbs the analytic loss gradient so the check must fail.
  bool inject_bug = false;
};

struct GradCheckReport {
  std::size_t trials = 0;
  double similarity_max_rel_err = 0.0;
  double loss_max_rel_err = 0.0;
  double encoder_max_rel_err = 0.0;
  bool similarity_ok = false;
  bool loss_ok = false;
  bool encoder_ok = false;

  bool passed() const noexcept { return similarity_ok && loss_ok && encoder_ok; }
};

/// |a - n| / max(|a|, |n|, kRelErrFloor). The floor keeps entries whose true
/// gradient is zero from turning rounding noise into a large ratio.
inline constexpr double kRelErrFloor = 1e-6;
double relative_error(double analytic, double numeric) noexcept;

/// Smallest distance of `scores` to a point where the loss is not smooth:
/// a hinge argument of 0, a mining threshold S_ii - margin, or a tie between
/// the two hardest candidate negatives (max-style losses only).
double boundary_distance(const Matrix& scores, const LossSpec& spec);

GradCheckReport run_grad_check(const GradCheckConfig& config);

}  // namespace xmodal

#endif  // XMODAL_GRADCHECK_HPP
