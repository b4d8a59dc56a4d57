#ifndef XMODAL_EVAL_HPP
#define XMODAL_EVAL_HPP

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "xmodal/matrix.hpp"

namespace xmodal {

/// Recall@K in percent, keyed by K, for both retrieval directions.
struct RecallReport {
  std::map<std::size_t, double> image_to_text;
  std::map<std::size_t, double> text_to_image;

  friend bool operator==(const RecallReport&, const RecallReport&) = default;
};

inline constexpr std::size_t kDefaultKs[] = {1, 5, 10};

/// Query i's true match is gallery item i. A query succeeds at K when fewer
/// than K gallery items outrank its match; ranking is by descending score,
/// equal scores ordered by lower index. Image-to-text ranks row i over
/// columns, text-to-image ranks column j over rows.
/// Throws ConfigError if scores is not square or some K is outside [1, N].
RecallReport recall_at_k(const Matrix& scores, std::span<const std::size_t> ks);

/// Number of gallery items ranked ahead of the true match, per query.
std::vector<std::size_t> ranks_image_to_text(const Matrix& scores);
std::vector<std::size_t> ranks_text_to_image(const Matrix& scores);

}  // namespace xmodal

#endif  // XMODAL_EVAL_HPP
