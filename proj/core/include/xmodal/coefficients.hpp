#ifndef XMODAL_COEFFICIENTS_HPP
#define XMODAL_COEFFICIENTS_HPP

#include <span>
#include <string>
#include <vector>

namespace xmodal {

/// Closed interval of similarity scores the weight rule is checked on.
struct SimDomain {
  double lo = -1.0;
  double hi = 1.0;
};

/// Hyperparameters of the polynomial losses.
///
/// `pos` holds a_0..a_P and `neg` holds b_0..b_Q in ascending powers, so the
/// constant terms a_0 and b_0 double as the hinge offsets of the two
/// per-anchor terms. `mining_margin` is the informative-pair margin.
struct PolyCoefficients {
  std::vector<double> pos{0.5, -0.7, 0.2};
  std::vector<double> neg{0.03, -0.3, 1.2};
  double mining_margin = 0.2;
  SimDomain domain{};

  std::size_t pos_degree() const { return pos.empty() ? 0 : pos.size() - 1; }
  std::size_t neg_degree() const { return neg.empty() ? 0 : neg.size() - 1; }

  // Published settings; all share P = Q = 2.
  static PolyCoefficients mscoco();
  static PolyCoefficients flickr30k();
  static PolyCoefficients activitynet();
  static PolyCoefficients msrvtt();
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
  /// Violations joined with "; ", or "ok".
  std::string summary() const;
};

/// Number of interior sample points used by validate_coefficients; both
/// domain endpoints are checked in addition.
inline constexpr int kValidationSamples = 1001;

/// Checks structure and the pair-weighting rule on `c.domain`.
///
/// With f(s) = Σ a_p s^p and g(s) = Σ b_q s^q, the pair weights are the
/// score derivatives of the hinged term: w_pos(s) = -f'(s), w_neg(s) = g'(s).
/// Accepted iff, at every sample point,
///   f'(s) <= 0    (the positive polynomial never rises with S_ii),
///   f''(s) >= 0   (w_pos shrinks as the positive score grows),
///   g''(s) >= 0   (w_neg grows as the negative score grows).
/// Never throws; every problem found is listed in the report.
ValidationReport validate_coefficients(const PolyCoefficients& c);

/// Σ coeffs[i] s^i by Horner's scheme. Empty coeffs evaluate to 0.
double poly_eval(std::span<const double> coeffs, double s) noexcept;

/// Σ_{i>=1} i coeffs[i] s^{i-1}.
double poly_deriv_eval(std::span<const double> coeffs, double s) noexcept;

/// Σ_{i>=2} i (i-1) coeffs[i] s^{i-2}.
double poly_second_deriv_eval(std::span<const double> coeffs, double s) noexcept;

/// Parses "0.5,-0.7,0.2". Throws ConfigError on malformed or empty input.
std::vector<double> parse_coefficient_list(const std::string& text);
std::string format_coefficient_list(std::span<const double> coeffs);

}  // namespace xmodal

#endif  // XMODAL_COEFFICIENTS_HPP
