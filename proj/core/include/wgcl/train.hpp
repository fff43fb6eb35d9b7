#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wgcl/dataset.hpp"
#include "wgcl/model.hpp"
#include "wgcl/objective.hpp"
#include "wgcl/random.hpp"

namespace wgcl {

// wgcl: final-layer noise. all_pert: noise on every layer. no_pert: the two
// contrastive views are identical. lightgcn: no contrastive branch at all.
enum class Variant { wgcl, all_pert, no_pert, lightgcn };

std::string_view to_string(Variant v) noexcept;
// Accepts "wgcl", "all-pert", "no-pert", "lightgcn"; ConfigError otherwise.
Variant parse_variant(std::string_view name);

struct TrainConfig {
  std::size_t dim = 64;
  std::size_t batch_size = 4096;
  double lr = 1e-4;
  double lambda_c = 0.1;
  double tau = 0.2;
  std::size_t layers = 2;
  double reg = 1e-4;
  std::size_t depth = 3;  // excitation levels K
  std::size_t patience = 30;
  std::size_t max_epochs = 500;
  std::uint64_t seed = 2024;
  Variant variant = Variant::wgcl;
  PoolMode pools = PoolMode::in_batch;

  void validate() const;
  ForwardOptions forward_options() const;
  // lambda_c is forced to 0 for the lightgcn variant.
  ObjectiveConfig objective() const;
};

// Uniform rejection sampler over items the user has not interacted with in
// training.
class NegativeSampler {
public:
  explicit NegativeSampler(const Dataset& ds);

  // One epoch: the training interactions in a fresh random order, each paired
  // with a sampled negative, cut into batches (the last one may be short).
  // Users who interacted with every item are skipped.
  std::vector<Batch> epoch(std::size_t batch_size, Rng& rng) const;

  std::uint32_t sample(std::uint32_t user, Rng& rng) const;
  bool has_negative(std::uint32_t user) const;

private:
  const Dataset* ds_;
  std::vector<std::vector<std::uint32_t>> positives_;
};

std::vector<Batch> sample_negatives(const Dataset& ds, std::size_t batch_size, Rng& rng);

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown loss;  // summed over the epoch's batches
  double val_recall20 = 0.0;
  double val_ndcg20 = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
  // Everything except wall time.
  bool same_outcome(const EpochRecord& other) const;
};

struct TrainResult {
  ModelParams initial;
  ModelParams best;
  std::size_t best_epoch = 0;  // 0: initial parameters
  double best_val_recall20 = 0.0;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Epoch loop with Adam and early stopping on validation Recall@20.
// Throws NumericError if the loss becomes non-finite.
TrainResult train_loop(const Dataset& ds, const TrainConfig& config,
                       const EpochCallback& on_epoch = {});

}  // namespace wgcl
