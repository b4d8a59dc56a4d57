#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "xmodal/errors.hpp"
#include "xmodal/eval.hpp"
#include "xmodal/rng.hpp"

using namespace xmodal;

namespace {

const std::vector<std::size_t> kKs{1, 5, 10};

// Sort-based oracle: stable sort by descending score keeps lower index first.
double oracle_i2t(const Matrix& s, std::size_t k) {
  const std::size_t n = s.rows();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s(i, a) > s(i, b); });
    if (std::find(order.begin(), order.begin() + k, i) != order.begin() + k) ++hits;
  }
  return 100.0 * hits / n;
}

}  // namespace

TEST(Recall, DominantDiagonalIsPerfect) {
  Matrix s(12, 12, 0.1);
  for (std::size_t i = 0; i < 12; ++i) s(i, i) = 0.9;
  const auto r = recall_at_k(s, kKs);
  EXPECT_EQ(r.image_to_text.at(1), 100.0);
  EXPECT_EQ(r.text_to_image.at(1), 100.0);
}

TEST(Recall, AntiDiagonalRanksLast) {
  Matrix s(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) s(i, j) = i == j ? -1.0 : 1.0 - 0.1 * ((i + j) % 4);
  const std::vector<std::size_t> ks{1, 4};
  const auto r = recall_at_k(s, ks);
  EXPECT_EQ(r.image_to_text.at(1), 0.0);
  EXPECT_EQ(r.image_to_text.at(4), 100.0);
  EXPECT_EQ(r.text_to_image.at(4), 100.0);
  const std::vector<std::size_t> five{5};
  EXPECT_THROW(recall_at_k(s, five), ConfigError);
  const std::vector<std::size_t> zero{0};
  EXPECT_THROW(recall_at_k(s, zero), ConfigError);
}

TEST(Recall, ThreeByThreeExample) {
  const Matrix s{{0.9, 0.8, 0.1}, {0.95, 0.5, 0.2}, {0.0, 0.1, 0.3}};
  const std::vector<std::size_t> ks{1};
  EXPECT_NEAR(recall_at_k(s, ks).image_to_text.at(1), 200.0 / 3.0, 1e-12);
}

TEST(Recall, TieBreakFavoursLowerIndex) {
  const Matrix s{{0.5, 0.5}, {0.5, 0.5}};
  EXPECT_EQ(ranks_image_to_text(s), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(ranks_text_to_image(s), (std::vector<std::size_t>{0, 1}));
}

TEST(Recall, MatchesSortOracleAndIsMonotone) {
  Rng rng(50);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 10 + rng.below(20);
    Matrix s(n, n);
    // Coarse values so ties occur.
    for (double& x : s.values()) x = static_cast<double>(rng.below(8)) / 8.0;
    const auto r = recall_at_k(s, kKs);
    const auto rt = recall_at_k(s.transposed(), kKs);
    for (std::size_t k : kKs) {
      ASSERT_DOUBLE_EQ(r.image_to_text.at(k), oracle_i2t(s, k));
      ASSERT_DOUBLE_EQ(r.text_to_image.at(k), rt.image_to_text.at(k));
    }
    ASSERT_LE(r.image_to_text.at(1), r.image_to_text.at(5));
    ASSERT_LE(r.image_to_text.at(5), r.image_to_text.at(10));
    ASSERT_LE(r.text_to_image.at(1), r.text_to_image.at(5));
    ASSERT_LE(r.text_to_image.at(5), r.text_to_image.at(10));
  }
}

TEST(Recall, PermutationConsistency) {
  Rng rng(51);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 12;
    Matrix s(n, n);
    for (double& x : s.values()) x = rng.uniform(-1, 1);
    const auto perm = rng.permutation(n);
    // Reorder pairs consistently: query perm[i] and its match move together.
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p(i, j) = s(perm[i], perm[j]);
    EXPECT_EQ(recall_at_k(s, kKs), recall_at_k(p, kKs));
  }
}
