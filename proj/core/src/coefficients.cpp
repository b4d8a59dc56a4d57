#include "xmodal/coefficients.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "xmodal/errors.hpp"

namespace xmodal {

namespace {

// Absorbs rounding in the sampled derivative values.
constexpr double kSignSlack = 1e-12;

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

PolyCoefficients PolyCoefficients::mscoco() { return {{0.5, -0.7, 0.2}, {0.03, -0.3, 1.2}}; }
PolyCoefficients PolyCoefficients::flickr30k() { return {{0.6, -0.7, 0.2}, {0.03, -0.4, 0.9}}; }
PolyCoefficients PolyCoefficients::activitynet() { return {{0.5, -0.7, 0.2}, {1.0, -0.2, 1.7}}; }
PolyCoefficients PolyCoefficients::msrvtt() { return {{0.5, -0.7, 0.2}, {0.03, -0.3, 1.8}}; }

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

double poly_eval(std::span<const double> coeffs, double s) noexcept {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double poly_deriv_eval(std::span<const double> coeffs, double s) noexcept {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) acc = acc * s + static_cast<double>(i) * coeffs[i];
  return acc;
}

double poly_second_deriv_eval(std::span<const double> coeffs, double s) noexcept {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 2;)
    acc = acc * s + static_cast<double>(i * (i - 1)) * coeffs[i];
  return acc;
}

ValidationReport validate_coefficients(const PolyCoefficients& c) {
  ValidationReport report;
  auto& v = report.violations;

  if (c.pos.empty()) v.emplace_back("positive coefficient list is empty");
  if (c.neg.empty()) v.emplace_back("negative coefficient list is empty");
  if (!all_finite(c.pos) || !all_finite(c.neg)) v.emplace_back("coefficients must be finite");
  if (!(c.mining_margin >= 0.0) || !std::isfinite(c.mining_margin))
    v.emplace_back("mining margin must be >= 0, got " + fmt(c.mining_margin));
  if (!(c.domain.lo < c.domain.hi) || !std::isfinite(c.domain.lo) || !std::isfinite(c.domain.hi))
    v.emplace_back("similarity domain needs lo < hi, got [" + fmt(c.domain.lo) + ", " +
                   fmt(c.domain.hi) + "]");
  if (!v.empty()) return report;

  // Worst offender of each rule over the sample grid, reported once.
  double worst_pos_slope = 0.0, at_pos_slope = 0.0;
  double worst_pos_curv = 0.0, at_pos_curv = 0.0;
  double worst_neg_curv = 0.0, at_neg_curv = 0.0;

  auto check = [&](double s) {
    const double pos_slope = poly_deriv_eval(c.pos, s);
    const double pos_curv = poly_second_deriv_eval(c.pos, s);
    const double neg_curv = poly_second_deriv_eval(c.neg, s);
    if (pos_slope > kSignSlack && pos_slope > worst_pos_slope) {
      worst_pos_slope = pos_slope;
      at_pos_slope = s;
    }
    if (pos_curv < -kSignSlack && pos_curv < worst_pos_curv) {
      worst_pos_curv = pos_curv;
      at_pos_curv = s;
    }
    if (neg_curv < -kSignSlack && neg_curv < worst_neg_curv) {
      worst_neg_curv = neg_curv;
      at_neg_curv = s;
    }
  };

  const double lo = c.domain.lo;
  const double hi = c.domain.hi;
  check(lo);
  check(hi);
  for (int k = 0; k < kValidationSamples; ++k) {
    check(lo + (hi - lo) * static_cast<double>(k) / (kValidationSamples - 1));
  }

  if (worst_pos_slope > 0.0)
    v.push_back("positive polynomial increasing: derivative " + fmt(worst_pos_slope) + " at s=" +
                fmt(at_pos_slope));
  if (worst_pos_curv < 0.0)
    v.push_back("positive weight increasing with similarity: second derivative " +
                fmt(worst_pos_curv) + " at s=" + fmt(at_pos_curv));
  if (worst_neg_curv < 0.0)
    v.push_back("negative weight decreasing with similarity: second derivative " +
                fmt(worst_neg_curv) + " at s=" + fmt(at_neg_curv));
  return report;
}

std::vector<double> parse_coefficient_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw ConfigError("empty entry in coefficient list '" + text + "'");
    item = item.substr(first, last - first + 1);
    double value = 0.0;
    const auto* b = item.data();
    const auto* e = item.data() + item.size();
    // from_chars rejects a leading '+'.
    if (*b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, value);
    if (ec != std::errc{} || ptr != e || !std::isfinite(value))
      throw ConfigError("bad coefficient '" + item + "' in '" + text + "'");
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

std::string format_coefficient_list(std::span<const double> coeffs) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i) os << ',';
    os << coeffs[i];
  }
  return os.str();
}

}  // namespace xmodal
