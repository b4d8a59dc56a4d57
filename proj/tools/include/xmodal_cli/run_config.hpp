#ifndef XMODAL_CLI_RUN_CONFIG_HPP
#define XMODAL_CLI_RUN_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "xmodal/data.hpp"
#include "xmodal/train.hpp"

namespace xmodal::cli {

/// Everything a training run needs. The JSON config file uses these field
/// names; command-line flags override whatever the file sets.
///
/// {
///   "loss": "max_poly", "a": [0.5,-0.7,0.2], "b": [0.03,-0.3,1.2],
///   "mining_margin": 0.2, "mining": true, "triplet_margin": 0.2,
///   "sim_domain": [-1, 1], "embed_dim": 16, "hidden_dim": 0,
///   "lr": 0.001, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8,
///   "lr_decay": 1.0, "lr_decay_epoch": 0,
///   "epochs": 30, "batch_size": 128, "seed": 1,
///   "data": "data.xmf",
///   "synthetic": {"classes": 32, "per_class": 64, "latent_dim": 16,
///                 "visual_dim": 64, "text_dim": 48, "noise_sigma": 0.1, "seed": 7},
///   "out": "run"
/// }
struct RunConfig {
  TrainConfig train{};
  /// Feature file; when absent the synthetic spec is generated instead.
  std::optional<std::filesystem::path> data;
  SyntheticSpec synthetic{};
  std::filesystem::path out = "run";
};

/// Throws ConfigError on unknown keys or wrongly typed values.
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config);

/// Validates the training part (coefficients first) and the data source.
void validate(const RunConfig& config);

/// Data named by the config: the file if set, otherwise generated.
FeaturePairSet resolve_dataset(const RunConfig& config);

}  // namespace xmodal::cli

#endif  // XMODAL_CLI_RUN_CONFIG_HPP
