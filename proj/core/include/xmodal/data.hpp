#ifndef XMODAL_DATA_HPP
#define XMODAL_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "xmodal/matrix.hpp"

namespace xmodal {

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

std::string_view to_string(Split split) noexcept;
/// "train" | "val" | "test". Throws ConfigError otherwise.
Split parse_split(std::string_view name);

inline constexpr std::uint32_t kNoClass = 0xFFFFFFFFu;

/// Paired features: visual row i and text row i form a positive pair.
struct FeaturePairSet {
  Matrix visual;
  Matrix text;
  std::vector<Split> splits;
  /// Latent class per row; empty when unknown.
  std::vector<std::uint32_t> classes;

  std::size_t size() const noexcept { return visual.rows(); }
  std::size_t visual_dim() const noexcept { return visual.cols(); }
  std::size_t text_dim() const noexcept { return text.cols(); }
  bool has_classes() const noexcept { return !classes.empty(); }

  std::vector<std::size_t> indices(Split split) const;
  std::size_t count(Split split) const;
  /// Rows of one split, in stored order.
  FeaturePairSet subset(Split split) const;

  /// Throws FormatError on inconsistent row counts or non-finite values.
  void validate() const;

  friend bool operator==(const FeaturePairSet&, const FeaturePairSet&) = default;
};

struct SyntheticSpec {
  std::size_t num_classes = 32;
  std::size_t pairs_per_class = 64;
  std::size_t latent_dim = 16;
  std::size_t visual_dim = 64;
  std::size_t text_dim = 48;
  double noise_sigma = 0.1;
  std::uint64_t seed = 7;
};

/// Throws ConfigError when a SyntheticSpec field is out of range.
void validate(const SyntheticSpec& spec);

/// Train/val/test sizes for n rows: floor(0.8n), floor(0.1n), floor(0.1n),
/// with the remainder added to train first, then val.
struct SplitCounts {
  std::size_t train, val, test;
};
SplitCounts split_counts(std::size_t n) noexcept;

/// Class prototypes are normalized standard-normal draws in the latent space.
/// Each pair samples z = prototype + N(0, sigma I); visual = A z and
/// text = B z + N(0, sigma^2 I) with fixed seeded Gaussian maps A, B scaled
/// by 1/sqrt(latent_dim). Rows are shuffled, then split 80/10/10 by a second
/// seeded shuffle. Values are rounded to float so the set survives a
/// save/load round trip unchanged.
FeaturePairSet generate_synthetic(const SyntheticSpec& spec);

/// Binary "XMF1" layout, all integers and floats little-endian:
///   "XMF1" | u32 N | u32 d1 | u32 d2 | f32[N*d1] visual | f32[N*d2] text |
///   u8[N] split (0 train, 1 val, 2 test) | u32[N] class (0xFFFFFFFF = none)
void save_features(const FeaturePairSet& set, const std::filesystem::path& path);
FeaturePairSet load_features(const std::filesystem::path& path);

/// Size in bytes of an XMF1 file.
std::size_t xmf_file_size(std::size_t n, std::size_t d1, std::size_t d2) noexcept;

/// CSV fixtures: header v_0..v_{d1-1},t_0..t_{d2-1}, optionally followed by
/// "split" (train/val/test) and "class" columns. Rows without a split column
/// are tagged train.
FeaturePairSet load_features_csv(const std::filesystem::path& path);

/// Picks the CSV reader for a ".csv" extension, XMF1 otherwise.
FeaturePairSet load_dataset(const std::filesystem::path& path);

}  // namespace xmodal

#endif  // XMODAL_DATA_HPP
