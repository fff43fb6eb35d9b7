#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wgcl/dataset.hpp"
#include "wgcl/train.hpp"

namespace wgcl {

// Hyper-parameter axes swept by the grid command. An empty axis keeps the
// single value from the training config.
struct GridAxes {
  std::vector<double> lambda_c{1e-1, 1e-2, 1e-3};
  std::vector<double> tau{0.2, 0.4, 0.6, 0.8};
  std::vector<std::size_t> layers{2, 3, 4};
  std::vector<std::size_t> depth;

  friend bool operator==(const GridAxes&, const GridAxes&) = default;
};

struct ExperimentConfig {
  std::string interactions;  // raw "<user>\t<item>" file
  std::string prepared;      // directory written by `prepare`; wins over interactions
  std::size_t k_core = 1;
  SplitSpec split;
  TrainConfig train;
  std::string output_dir = "runs/wgcl";
  bool force = false;
  GridAxes grid;
  bool allow_custom_grid = false;
  std::vector<std::size_t> ablation_depths{1, 2, 3, 4};

  // Throws ConfigError on any out-of-domain value.
  void validate() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

struct ConfigKey {
  std::string_view name;     // dotted key, e.g. "train.lr"
  std::string_view alias;    // short CLI flag without dashes, may be empty
  std::string_view domain;   // human-readable expected domain
};

// Every recognised key, in echo order.
const std::vector<ConfigKey>& config_keys();

// Flat {"dotted.key": value} object with every key present.
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

// Applies the keys present in `flat` on top of `base`. Unknown keys and
// ill-typed values throw ConfigError naming the key; range checks are left to
// validate() so that file values and flags can be layered first.
ExperimentConfig config_from_json(const nlohmann::json& flat, ExperimentConfig base = {});

// Applies one textual override, as given on the command line. Lists accept
// either JSON arrays or comma-separated values.
void apply_override(ExperimentConfig& config, std::string_view key, std::string_view text);

ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const ExperimentConfig& config);

}  // namespace wgcl
