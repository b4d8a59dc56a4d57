#include "xmodal/eval.hpp"

#include <string>

#include "xmodal/errors.hpp"

namespace xmodal {

namespace {

// Items ranked ahead of `truth` in a gallery read through `score(item)`.
template <typename Score>
std::size_t rank_of(std::size_t truth, std::size_t n, Score score) {
  const double target = score(truth);
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = score(j);
    if (s > target || (s == target && j < truth)) ++ahead;
  }
  return ahead;
}

void require_square(const Matrix& scores) {
  if (scores.rows() != scores.cols() || scores.rows() == 0)
    throw ConfigError("recall_at_k: similarity matrix must be square and non-empty");
}

std::map<std::size_t, double> recall_from_ranks(const std::vector<std::size_t>& ranks,
                                                std::span<const std::size_t> ks) {
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t r : ranks) hits += r < k;
    out[k] = 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  return out;
}

}  // namespace

std::vector<std::size_t> ranks_image_to_text(const Matrix& scores) {
  require_square(scores);
  const std::size_t n = scores.rows();
  std::vector<std::size_t> ranks(n);
  for (std::size_t i = 0; i < n; ++i)
    ranks[i] = rank_of(i, n, [&](std::size_t j) { return scores(i, j); });
  return ranks;
}

std::vector<std::size_t> ranks_text_to_image(const Matrix& scores) {
  require_square(scores);
  const std::size_t n = scores.rows();
  std::vector<std::size_t> ranks(n);
  for (std::size_t j = 0; j < n; ++j)
    ranks[j] = rank_of(j, n, [&](std::size_t i) { return scores(i, j); });
  return ranks;
}

RecallReport recall_at_k(const Matrix& scores, std::span<const std::size_t> ks) {
  require_square(scores);
  for (std::size_t k : ks) {
    if (k < 1 || k > scores.rows())
      throw ConfigError("recall_at_k: K=" + std::to_string(k) + " outside [1, " +
                        std::to_string(scores.rows()) + "]");
  }
  return {recall_from_ranks(ranks_image_to_text(scores), ks),
          recall_from_ranks(ranks_text_to_image(scores), ks)};
}

}  // namespace xmodal
