#ifndef XMODAL_MINING_HPP
#define XMODAL_MINING_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xmodal/matrix.hpp"

namespace xmodal {

/// Informative negatives of a batch, in both retrieval directions.
///
/// row(i, j): text j is a mined negative for visual anchor i.
/// col(i, j): visual i is a mined negative for text anchor j.
/// Diagonal entries are always false.
class MiningMask {
 public:
  MiningMask() = default;
  explicit MiningMask(std::size_t n) : n_(n), row_(n * n, 0), col_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  bool row(std::size_t i, std::size_t j) const noexcept { return row_[i * n_ + j] != 0; }
  bool col(std::size_t i, std::size_t j) const noexcept { return col_[i * n_ + j] != 0; }
  void set_row(std::size_t i, std::size_t j, bool v) noexcept { row_[i * n_ + j] = v; }
  void set_col(std::size_t i, std::size_t j, bool v) noexcept { col_[i * n_ + j] = v; }

  /// Number of mined negatives of visual anchor i.
  std::size_t row_count(std::size_t i) const noexcept;
  /// Number of mined negatives of text anchor j.
  std::size_t col_count(std::size_t j) const noexcept;
  /// Mined entries over both masks divided by 2 N (N - 1).
  double mined_fraction() const noexcept;

  friend bool operator==(const MiningMask&, const MiningMask&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> row_;
  std::vector<std::uint8_t> col_;
};

/// Marks (i, j), i != j, as a row negative iff S_ij > S_ii - margin and as a
/// column negative iff S_ij > S_jj - margin. Ties are not mined.
/// Throws ConfigError if scores is not square or margin is negative.
MiningMask mine(const Matrix& scores, double margin);

/// Every off-diagonal pair marked in both directions (mining disabled).
MiningMask all_negatives(std::size_t n);

}  // namespace xmodal

#endif  // XMODAL_MINING_HPP
