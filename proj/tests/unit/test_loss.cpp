#include <gtest/gtest.h>

#include <cmath>

#include "xmodal/errors.hpp"
#include "xmodal/loss.hpp"
#include "xmodal/rng.hpp"

using namespace xmodal;

namespace {

LossSpec spec_of(LossKind kind, PolyCoefficients c = PolyCoefficients::mscoco()) {
  LossSpec s;
  s.kind = kind;
  s.coefficients = std::move(c);
  return s;
}

LossSpec triplet_shaped(LossKind kind, double margin) {
  LossSpec s = spec_of(kind);
  s.coefficients.pos = {margin, -1.0};
  s.coefficients.neg = {0.0, 1.0};
  s.mining_enabled = false;
  return s;
}

Matrix uniform_scores(std::size_t n, Rng& rng) {
  Matrix m(n, n);
  for (double& x : m.values()) x = rng.uniform(-1, 1);
  return m;
}

double pw(const std::vector<double>& c, double s) {
  double acc = 0;
  for (std::size_t p = 0; p < c.size(); ++p) acc += c[p] * std::pow(s, double(p));
  return acc;
}
double dpw(const std::vector<double>& c, double s) {
  double acc = 0;
  for (std::size_t p = 1; p < c.size(); ++p) acc += p * c[p] * std::pow(s, double(p - 1));
  return acc;
}

// Weighted-sum form: every active anchor adds w_pos = f'(S_ii)/N on its
// positive and w_neg = g'(S_ij)/(N Num) on each used negative.
LossResult weighted_sum_reference(const Matrix& s, const LossSpec& spec) {
  const std::size_t n = s.rows();
  const auto& a = spec.coefficients.pos;
  const auto& b = spec.coefficients.neg;
  const double lam = spec.coefficients.mining_margin;
  LossResult r;
  r.grad_scores = Matrix(n, n);
  for (int dir = 0; dir < 2; ++dir) {
    for (std::size_t k = 0; k < n; ++k) {
      auto at = [&](std::size_t x) -> double { return dir == 0 ? s(k, x) : s(x, k); };
      auto grad = [&](std::size_t x) -> double& { return dir == 0 ? r.grad_scores(k, x) : r.grad_scores(x, k); };
      std::vector<std::size_t> mined;
      for (std::size_t x = 0; x < n; ++x)
        if (x != k && (!spec.mining_enabled || at(x) > at(k) - lam)) mined.push_back(x);
      if (mined.empty()) continue;
      if (spec.kind == LossKind::max_poly) {
        std::size_t best = mined[0];
        for (std::size_t x : mined)
          if (at(x) > at(best)) best = x;
        mined = {best};
      }
      double neg = 0;
      for (std::size_t x : mined) neg += pw(b, at(x));
      const double term = pw(a, at(k)) + neg / mined.size();
      if (term <= 0) continue;
      r.value += term / n;
      grad(k) += dpw(a, at(k)) / n;
      for (std::size_t x : mined) grad(x) += dpw(b, at(x)) / (double(n) * mined.size());
    }
  }
  return r;
}

double fd_rel_err(Matrix s, const LossSpec& spec) {
  const Matrix g = compute_loss(s, spec).grad_scores;
  const double h = 1e-6;
  double worst = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double saved = s.values()[k];
    s.values()[k] = saved + h;
    const double up = compute_loss(s, spec).value;
    s.values()[k] = saved - h;
    const double down = compute_loss(s, spec).value;
    s.values()[k] = saved;
    const double fd = (up - down) / (2 * h), an = g.values()[k];
    worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
  }
  return worst;
}

// Smallest gap between any two entries, between an entry and a mining
// threshold, or a hinge argument and 0 is approximated by perturbation
// stability: the loss kind's mined sets, argmaxes and hinge signs must not
// change under a 1e-3 shift of any single entry.
bool stable(const Matrix& s, const LossSpec& spec) {
  const LossResult base = compute_loss(s, spec);
  for (std::size_t k = 0; k < s.size(); ++k)
    for (double d : {-1e-3, 1e-3}) {
      Matrix t = s;
      t.values()[k] += d;
      const LossResult r = compute_loss(t, spec);
      if (r.diagnostics.active_hinges != base.diagnostics.active_hinges ||
          r.diagnostics.mined_per_visual_anchor != base.diagnostics.mined_per_visual_anchor ||
          r.diagnostics.mined_per_text_anchor != base.diagnostics.mined_per_text_anchor)
        return false;
      for (std::size_t m = 0; m < s.size(); ++m)
        if ((r.grad_scores.values()[m] == 0) != (base.grad_scores.values()[m] == 0)) return false;
    }
  return true;
}

}  // namespace

TEST(Triplet, SatisfiedMarginsGiveZero) {
  Matrix s(4, 4, 0.0);
  for (std::size_t i = 0; i < 4; ++i) s(i, i) = 1.0;
  const auto r = triplet_forward_backward(s, 0.2);
  EXPECT_EQ(r.value, 0.0);
  for (double g : r.grad_scores.values()) EXPECT_EQ(g, 0.0);
}

TEST(Triplet, FlatMatrix) {
  const auto r = triplet_forward_backward(Matrix{{0.5, 0.5}, {0.5, 0.5}}, 0.2);
  EXPECT_NEAR(r.value, 0.4, 1e-15);
  EXPECT_EQ(r.diagnostics.active_hinges, 4u);
}

TEST(Triplet, ZeroMarginDominantDiagonal) {
  const auto r = triplet_forward_backward(Matrix{{0.9, 0.1, 0.8}, {0.2, 0.7, 0.3}, {0.0, 0.5, 0.85}}, 0.0);
  EXPECT_EQ(r.value, 0.0);
}

TEST(Triplet, TiesGoToLowestIndex) {
  const auto r = triplet_forward_backward(Matrix{{0.5, 0.6, 0.6}, {0.0, 0.9, 0.0}, {0.0, 0.0, 0.9}}, 0.2);
  EXPECT_GT(r.grad_scores(0, 1), 0.0);
  EXPECT_EQ(r.grad_scores(0, 2), 0.0);
}

TEST(PolyLoss, WorkedExample) {
  const Matrix s{{0.8, 0.75}, {0.3, 0.6}};
  EXPECT_NEAR(compute_loss(s, spec_of(LossKind::avg_poly)).value, 0.59, 1e-12);
  EXPECT_NEAR(compute_loss(s, spec_of(LossKind::max_poly)).value, 0.59, 1e-12);
  const auto r = compute_loss(s, spec_of(LossKind::max_poly));
  EXPECT_EQ(r.diagnostics.mined_per_visual_anchor, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(r.diagnostics.mined_per_text_anchor, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(r.grad_scores(1, 0), 0.0);
}

TEST(PolyLoss, EmptyMasksGiveZero) {
  Matrix s(3, 3, -0.5);
  for (std::size_t i = 0; i < 3; ++i) s(i, i) = 0.9;
  for (LossKind k : {LossKind::avg_poly, LossKind::max_poly}) {
    const auto r = compute_loss(s, spec_of(k));
    EXPECT_EQ(r.value, 0.0);
    for (double g : r.grad_scores.values()) EXPECT_EQ(g, 0.0);
  }
}

TEST(PolyLoss, SingleMinedNegativeIsTripletHinge) {
  // Each anchor mines exactly one negative at margin 0.2.
  const Matrix s{{0.7, 0.6, -0.9}, {-0.9, 0.5, 0.45}, {0.65, -0.9, 0.8}};
  LossSpec spec = triplet_shaped(LossKind::avg_poly, 0.3);
  spec.mining_enabled = true;
  const auto r = compute_loss(s, spec);
  for (std::size_t i = 0; i < 3; ++i) ASSERT_EQ(r.diagnostics.mined_per_visual_anchor[i], 1u);
  double expected = 0;
  expected += std::max(0.0, 0.3 - 0.7 + 0.6) / 3 + std::max(0.0, 0.3 - 0.5 + 0.45) / 3 +
              std::max(0.0, 0.3 - 0.8 + 0.65) / 3;
  for (std::size_t j = 0; j < 3; ++j) {
    double hard = -2;
    for (std::size_t i = 0; i < 3; ++i)
      if (i != j && s(i, j) > s(j, j) - 0.2) hard = s(i, j);
    if (hard > -2) expected += std::max(0.0, 0.3 - s(j, j) + hard) / 3;
  }
  EXPECT_NEAR(r.value, expected, 1e-15);
  spec.kind = LossKind::max_poly;
  EXPECT_EQ(compute_loss(s, spec).value, r.value);
}

TEST(PolyLoss, TripletDegeneracyExact) {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const Matrix s = uniform_scores(2 + rng.below(10), rng);
    const double margin = rng.uniform(0, 0.5);
    const auto poly = compute_loss(s, triplet_shaped(LossKind::max_poly, margin));
    const auto trip = triplet_forward_backward(s, margin);
    ASSERT_NEAR(poly.value, trip.value, 1e-12);
    ASSERT_LE(max_abs_diff(poly.grad_scores, trip.grad_scores), 1e-12);
  }
}

TEST(PolyLoss, MatchesWeightedSumReference) {
  Rng rng(23);
  for (int t = 0; t < 300; ++t) {
    const Matrix s = uniform_scores(2 + rng.below(10), rng);
    for (LossKind k : {LossKind::avg_poly, LossKind::max_poly})
      for (bool mining : {true, false})
        for (auto c : {PolyCoefficients::mscoco(), PolyCoefficients::activitynet()}) {
          LossSpec spec = spec_of(k, c);
          spec.mining_enabled = mining;
          const auto ours = compute_loss(s, spec);
          const auto ref = weighted_sum_reference(s, spec);
          ASSERT_NEAR(ours.value, ref.value, 1e-12);
          ASSERT_LE(max_abs_diff(ours.grad_scores, ref.grad_scores), 1e-12);
        }
  }
}

TEST(PolyLoss, GradientMatchesFiniteDifferences) {
  Rng rng(29);
  for (LossKind k : {LossKind::triplet, LossKind::avg_poly, LossKind::max_poly}) {
    int checked = 0;
    while (checked < 100) {
      const Matrix s = uniform_scores(3 + rng.below(6), rng);
      const LossSpec spec = spec_of(k);
      if (!stable(s, spec)) continue;
      ++checked;
      ASSERT_LE(fd_rel_err(s, spec), 1e-5) << to_string(k);
    }
  }
}

TEST(PolyLoss, InvariantsHold) {
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const Matrix s = uniform_scores(2 + rng.below(12), rng);
    for (LossKind k : {LossKind::triplet, LossKind::avg_poly, LossKind::max_poly}) {
      const auto r = compute_loss(s, spec_of(k));
      ASSERT_GE(r.value, 0.0);
      ASSERT_TRUE(std::isfinite(r.value));
      ASSERT_TRUE(r.grad_scores.all_finite());
      if (r.diagnostics.active_hinges == 0)
        for (double g : r.grad_scores.values()) ASSERT_EQ(g, 0.0);
    }
  }
}

TEST(PolyLoss, WeightRule) {
  // With valid coefficients the positive weight -f' never grows and the
  // negative weight g' never shrinks as the score increases.
  for (const auto& c : {PolyCoefficients::mscoco(), PolyCoefficients::flickr30k(),
                        PolyCoefficients::activitynet(), PolyCoefficients::msrvtt()}) {
    for (double s = -1; s < 1; s += 0.01) {
      EXPECT_LE(std::abs(poly_deriv_eval(c.pos, s + 0.01)), std::abs(poly_deriv_eval(c.pos, s)) + 1e-12);
      EXPECT_GE(poly_deriv_eval(c.neg, s + 0.01), poly_deriv_eval(c.neg, s) - 1e-12);
    }
  }
}

TEST(LossSpec, ValidationAndDispatch) {
  LossSpec bad = spec_of(LossKind::max_poly);
  bad.coefficients.pos = {0, 1};
  EXPECT_FALSE(validate_loss_spec(bad).ok());
  LossSpec trip = spec_of(LossKind::triplet);
  trip.triplet_margin = -0.1;
  EXPECT_FALSE(validate_loss_spec(trip).ok());
  trip.triplet_margin = 0.2;
  EXPECT_TRUE(validate_loss_spec(trip).ok());
  const Matrix s{{0.8, 0.75}, {0.3, 0.6}};
  EXPECT_EQ(compute_loss(s, trip).value, triplet_forward_backward(s, 0.2).value);
  EXPECT_EQ(parse_loss_kind("avg_poly"), LossKind::avg_poly);
  EXPECT_THROW(parse_loss_kind("hinge"), ConfigError);
  EXPECT_THROW(compute_loss(Matrix(1, 1, 0.5), spec_of(LossKind::max_poly)), ConfigError);
}
