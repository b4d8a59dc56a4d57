#ifndef XMODAL_SIMILARITY_HPP
#define XMODAL_SIMILARITY_HPP

#include <vector>

#include "xmodal/matrix.hpp"

namespace xmodal {

enum class Modality { visual, text };

/// One embedding per row.
struct EmbeddingBatch {
  Matrix values;
  Modality modality = Modality::visual;
};

/// Rows with a norm below this are rejected by cosine_forward.
inline constexpr double kMinRowNorm = 1e-12;

/// Batch similarity scores plus what the backward pass needs.
///
/// scores(i, j) is the cosine similarity between visual row i and text row j;
/// the diagonal holds the positive pairs.
struct SimilarityMatrix {
  Matrix scores;
  Matrix visual_unit;
  Matrix text_unit;
  std::vector<double> visual_norms;
  std::vector<double> text_norms;

  std::size_t size() const noexcept { return scores.rows(); }
};

struct EmbeddingGrads {
  Matrix visual;
  Matrix text;
};

/// Cosine similarity of every (visual, text) row pair.
/// Throws ConfigError on row-count or dimension mismatch and on zero-norm rows.
SimilarityMatrix cosine_forward(const EmbeddingBatch& visual, const EmbeddingBatch& text);

/// Gradient of Σ_ij grad_scores(i,j) * scores(i,j) with respect to the raw
/// (unnormalized) embeddings. For a row u with unit vector û the chain rule
/// through normalization is g ↦ (g - (g·û) û) / ‖u‖.
EmbeddingGrads cosine_backward(const SimilarityMatrix& sim, const Matrix& grad_scores);

}  // namespace xmodal

#endif  // XMODAL_SIMILARITY_HPP
