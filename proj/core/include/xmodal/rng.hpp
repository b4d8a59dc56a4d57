#ifndef XMODAL_RNG_HPP
#define XMODAL_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace xmodal {

/// Counter-based generator: output k is a fixed hash of (key, k).
///
/// The stream depends only on the seed, never on the platform's standard
/// library, so every distribution here is implemented in-house rather than
/// through <random>'s implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Standard normal via Box-Muller (the spare value is cached).
  double normal() noexcept;
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const noexcept;

  /// In-place Fisher-Yates shuffle of 0..n-1 style index vectors.
  void shuffle(std::vector<std::size_t>& items) noexcept;
  std::vector<std::size_t> permutation(std::size_t n) noexcept;

 private:
  Rng(std::uint64_t key, int) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace xmodal

#endif  // XMODAL_RNG_HPP
