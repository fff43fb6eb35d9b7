#include "wgcl/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "wgcl/error.hpp"
#include "wgcl/eval.hpp"
#include "wgcl/graph.hpp"
#include "wgcl/optimizer.hpp"

namespace wgcl {
namespace {

constexpr const char* kModule = "train";

// Independent streams carved out of the single configured seed.
enum Stream : std::uint64_t { kInitStream = 1, kSampleStream = 2, kNoiseStream = 3 };

}  // namespace

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::wgcl: return "wgcl";
    case Variant::all_pert: return "all-pert";
    case Variant::no_pert: return "no-pert";
    case Variant::lightgcn: return "lightgcn";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (const auto v : {Variant::wgcl, Variant::all_pert, Variant::no_pert, Variant::lightgcn}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError(kModule, fmt::format("unknown variant '{}'; expected one of {{wgcl, all-pert, no-pert, lightgcn}}", name));
}

void TrainConfig::validate() const {
  auto require = [](bool ok, std::string_view what) {
    if (!ok) throw ConfigError(kModule, std::string(what));
  };
  require(dim >= 1, "model.d must be >= 1");
  require(batch_size >= 1, "train.batch_size must be >= 1");
  require(lr > 0 && std::isfinite(lr), "train.lr must be > 0");
  require(lambda_c >= 0 && std::isfinite(lambda_c), "train.lambda_c must be >= 0");
  require(tau > 0 && std::isfinite(tau), "train.tau must be > 0");
  require(layers >= 1, "model.L must be >= 1");
  require(reg >= 0 && std::isfinite(reg), "train.reg must be >= 0");
  require(depth >= 1 && depth <= 4, "model.K must be in 1..4");
  require(patience >= 1, "train.patience must be >= 1");
  // Ladder feasibility for this d.
  (void)GranularitySchedule::make(dim, depth);
}

ForwardOptions TrainConfig::forward_options() const {
  ForwardOptions o;
  o.layers = layers;
  o.contrastive = variant != Variant::lightgcn;
  o.mode = variant == Variant::all_pert  ? PerturbMode::all_layers
           : variant == Variant::no_pert ? PerturbMode::none
                                         : PerturbMode::final_layer;
  return o;
}

ObjectiveConfig TrainConfig::objective() const {
  return {reg, variant == Variant::lightgcn ? 0.0 : lambda_c, tau};
}

NegativeSampler::NegativeSampler(const Dataset& ds)
    : ds_(&ds), positives_(items_by_user(ds.num_users, ds.train)) {
  std::size_t saturated = 0;
  for (std::uint32_t u = 0; u < ds.num_users; ++u)
    if (!has_negative(u)) ++saturated;
  if (saturated > 0) {
    spdlog::warn("[train] {} user(s) interacted with every item; their triplets are skipped", saturated);
  }
}

bool NegativeSampler::has_negative(std::uint32_t user) const {
  return positives_.at(user).size() < ds_->num_items;
}

std::uint32_t NegativeSampler::sample(std::uint32_t user, Rng& rng) const {
  const auto& pos = positives_.at(user);
  if (pos.size() >= ds_->num_items) {
    throw DataError(kModule, fmt::format("user {} has no non-interacted item", user));
  }
  for (;;) {
    const auto item = static_cast<std::uint32_t>(rng.below(ds_->num_items));
    if (!std::binary_search(pos.begin(), pos.end(), item)) return item;
  }
}

std::vector<Batch> NegativeSampler::epoch(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0) throw ConfigError(kModule, "batch size must be >= 1");
  std::vector<Interaction> order = ds_->train;
  rng.shuffle(std::span<Interaction>(order));

  std::vector<Batch> batches;
  Batch current;
  current.reserve(std::min(batch_size, order.size()));
  for (const auto& x : order) {
    if (!has_negative(x.user)) continue;
    current.push_back({x.user, x.item, sample(x.user, rng)});
    if (current.size() == batch_size) {
      batches.push_back(std::move(current));
      current = {};
    }
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

std::vector<Batch> sample_negatives(const Dataset& ds, std::size_t batch_size, Rng& rng) {
  return NegativeSampler(ds).epoch(batch_size, rng);
}

nlohmann::json EpochRecord::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["rec"] = loss.rec;
  j["cl"] = loss.cl;
  j["reg"] = loss.reg;
  j["total"] = loss.total;
  j["val_recall20"] = val_recall20;
  j["val_ndcg20"] = val_ndcg20;
  j["seconds"] = seconds;
  return j;
}

bool EpochRecord::same_outcome(const EpochRecord& other) const {
  return epoch == other.epoch && loss == other.loss && val_recall20 == other.val_recall20 &&
         val_ndcg20 == other.val_ndcg20;
}

TrainResult train_loop(const Dataset& ds, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (ds.train.empty()) throw DataError(kModule, "training split is empty");

  const auto adj = build_adjacency(BipartiteGraph::from_train(ds));
  const auto schedule = GranularitySchedule::make(config.dim, config.depth);
  const auto options = config.forward_options();
  const auto objective = config.objective();
  const bool train_excitation = options.contrastive;

  TrainResult result;
  result.initial = init_params(ds.num_nodes(), schedule, mix_seed(config.seed, kInitStream));
  result.best = result.initial;
  result.best_val_recall20 = -std::numeric_limits<double>::infinity();
  if (config.max_epochs == 0) {
    result.best_val_recall20 = 0.0;
    return result;
  }

  ModelParams params = result.initial;
  AdamState adam = AdamState::for_params(params);
  const NegativeSampler sampler(ds);
  Rng sample_rng(mix_seed(config.seed, kSampleStream));
  Rng noise_rng(mix_seed(config.seed, kNoiseStream));
  constexpr std::size_t kMonitorK[] = {20};

  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochRecord record;
    record.epoch = epoch;

    for (const auto& batch : sampler.epoch(config.batch_size, sample_rng)) {
      const auto state = forward(adj, params, options, noise_rng);
      const auto pools = NegativePools::make(config.pools, batch, ds.num_users, ds.num_items);
      auto step = total_loss_and_grads(state, adj, params, batch, pools, objective);
      if (!std::isfinite(step.loss.total)) {
        throw NumericError(kModule, fmt::format("non-finite loss at epoch {} (rec={}, cl={})", epoch,
                                                step.loss.rec, step.loss.cl));
      }
      record.loss += step.loss;
      adam_step(params, step.grads, adam, config.lr, train_excitation);
    }

    const auto val = evaluate(final_representation(adj, params, config.layers), ds, Phase::val, kMonitorK);
    record.val_recall20 = val[20].recall;
    record.val_ndcg20 = val[20].ndcg;
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.val_recall20 > result.best_val_recall20) {
      result.best_val_recall20 = record.val_recall20;
      result.best_epoch = epoch;
      result.best = params;
      stale = 0;
    } else if (++stale >= config.patience) {
      spdlog::info("[train] early stop at epoch {} (best epoch {})", epoch, result.best_epoch);
      break;
    }
  }
  return result;
}

}  // namespace wgcl
