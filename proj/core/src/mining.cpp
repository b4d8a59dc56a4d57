#include "xmodal/mining.hpp"

#include <algorithm>
#include <cmath>

#include "xmodal/errors.hpp"

namespace xmodal {

std::size_t MiningMask::row_count(std::size_t i) const noexcept {
  return static_cast<std::size_t>(
      std::count(row_.begin() + static_cast<std::ptrdiff_t>(i * n_),
                 row_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_), std::uint8_t{1}));
}

std::size_t MiningMask::col_count(std::size_t j) const noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_; ++i) count += col_[i * n_ + j];
  return count;
}

double MiningMask::mined_fraction() const noexcept {
  if (n_ < 2) return 0.0;
  const auto mined = std::count(row_.begin(), row_.end(), std::uint8_t{1}) +
                     std::count(col_.begin(), col_.end(), std::uint8_t{1});
  return static_cast<double>(mined) / static_cast<double>(2 * n_ * (n_ - 1));
}

MiningMask mine(const Matrix& scores, double margin) {
  if (scores.rows() != scores.cols()) throw ConfigError("mine: similarity matrix must be square");
  if (!(margin >= 0.0)) throw ConfigError("mine: margin must be >= 0");
  const std::size_t n = scores.rows();
  MiningMask mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double row_threshold = scores(i, i) - margin;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double s = scores(i, j);
      mask.set_row(i, j, s > row_threshold);
      mask.set_col(i, j, s > scores(j, j) - margin);
    }
  }
  return mask;
}

MiningMask all_negatives(std::size_t n) {
  MiningMask mask(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) {
        mask.set_row(i, j, true);
        mask.set_col(i, j, true);
      }
  return mask;
}

}  // namespace xmodal
