#include "xmodal/similarity.hpp"

#include <cmath>
#include <string>

#include "xmodal/errors.hpp"

namespace xmodal {

namespace {

const char* name(Modality m) { return m == Modality::visual ? "visual" : "text"; }

Matrix normalize_rows(const EmbeddingBatch& batch, std::vector<double>& norms) {
  const Matrix& m = batch.values;
  Matrix unit(m.rows(), m.cols());
  norms.assign(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sq = 0.0;
    for (double x : m.row(r)) sq += x * x;
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) {
      throw NumericalError(std::string(name(batch.modality)) + " embedding row " +
                           std::to_string(r) + " is not finite");
    }
    if (norm < kMinRowNorm) {
      throw ConfigError(std::string(name(batch.modality)) + " embedding row " + std::to_string(r) +
                        " has zero norm");
    }
    norms[r] = norm;
    auto src = m.row(r);
    auto dst = unit.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = src[c] / norm;
  }
  return unit;
}

// (g - (g·û) û) / ‖u‖ applied to every row of g in place.
void project_out_radial(Matrix& g, const Matrix& unit, const std::vector<double>& norms) {
  for (std::size_t r = 0; r < g.rows(); ++r) {
    auto gr = g.row(r);
    auto ur = unit.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < g.cols(); ++c) dot += gr[c] * ur[c];
    for (std::size_t c = 0; c < g.cols(); ++c) gr[c] = (gr[c] - dot * ur[c]) / norms[r];
  }
}

}  // namespace

SimilarityMatrix cosine_forward(const EmbeddingBatch& visual, const EmbeddingBatch& text) {
  if (visual.values.rows() != text.values.rows()) {
    throw ConfigError("cosine_forward: " + std::to_string(visual.values.rows()) +
                      " visual rows vs " + std::to_string(text.values.rows()) + " text rows");
  }
  if (visual.values.cols() != text.values.cols()) {
    throw ConfigError("cosine_forward: embedding dimension mismatch (" +
                      std::to_string(visual.values.cols()) + " vs " +
                      std::to_string(text.values.cols()) + ")");
  }
  SimilarityMatrix sim;
  sim.visual_unit = normalize_rows(visual, sim.visual_norms);
  sim.text_unit = normalize_rows(text, sim.text_norms);
  sim.scores = matmul_transposed_rhs(sim.visual_unit, sim.text_unit);
  return sim;
}

EmbeddingGrads cosine_backward(const SimilarityMatrix& sim, const Matrix& grad_scores) {
  if (!grad_scores.same_shape(sim.scores)) {
    throw ConfigError("cosine_backward: grad_scores is " + std::to_string(grad_scores.rows()) +
                      "x" + std::to_string(grad_scores.cols()) + ", scores are " +
                      std::to_string(sim.scores.rows()) + "x" + std::to_string(sim.scores.cols()));
  }
  // d/dv̂_i = Σ_j G_ij t̂_j and d/dt̂_j = Σ_i G_ij v̂_i.
  EmbeddingGrads out{matmul(grad_scores, sim.text_unit),
                     matmul_transposed_lhs(grad_scores, sim.visual_unit)};
  project_out_radial(out.visual, sim.visual_unit, sim.visual_norms);
  project_out_radial(out.text, sim.text_unit, sim.text_norms);
  return out;
}

}  // namespace xmodal
