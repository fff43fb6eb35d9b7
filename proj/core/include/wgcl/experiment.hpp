#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wgcl/config.hpp"
#include "wgcl/dataset.hpp"
#include "wgcl/eval.hpp"
#include "wgcl/train.hpp"

namespace wgcl {

// Prepared directory when configured, otherwise raw file -> k-core -> split.
Dataset load_experiment_dataset(const ExperimentConfig& config);

// Creates `dir`, refusing a non-empty existing directory unless `force`.
void prepare_output_dir(const std::filesystem::path& dir, bool force);

struct RunOutcome {
  TrainResult train;
  EvalReport val;   // best checkpoint, validation phase
  EvalReport test;  // best checkpoint, test phase
};

// Train, then evaluate the best checkpoint. No files are written.
RunOutcome train_and_test(const Dataset& ds, const TrainConfig& config,
                          const EpochCallback& on_epoch = {});

// Writes config.json, history.jsonl, checkpoint.json and metrics.json into
// config.output_dir.
RunOutcome run_experiment(const ExperimentConfig& config);

// Writes the prepared dataset (see save_dataset) into config.output_dir.
DatasetStats prepare_dataset(const ExperimentConfig& config);

inline constexpr const char* kAblationHeader = "variant,R@10,R@20,N@10,N@20";

struct AblationRow {
  std::string variant;
  EvalReport test;
};

void write_ablation_row(std::ostream& out, const AblationRow& row);

// Every variant at the configured K, then one "W-G<K>" row (full model) per
// entry of config.ablation_depths. Streams rows to <output_dir>/ablation.csv.
std::vector<AblationRow> run_ablation_suite(const ExperimentConfig& config);

inline constexpr const char* kGridHeader = "lambda_c,tau,L,K,val_R@20,R@10,R@20,N@10,N@20";

struct GridRow {
  double lambda_c = 0.0;
  double tau = 0.0;
  std::size_t layers = 0;
  std::size_t depth = 0;
  EvalReport val;
  EvalReport test;
};

// Cartesian sweep over config.grid, streamed to <output_dir>/grid.csv.
std::vector<GridRow> run_grid(const ExperimentConfig& config);

}  // namespace wgcl
