#include "wgcl/experiment.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "wgcl/checkpoint.hpp"
#include "wgcl/error.hpp"
#include "wgcl/graph.hpp"
#include "wgcl/model.hpp"

namespace wgcl {
namespace {

constexpr const char* kModule = "experiment";

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(kModule, fmt::format("cannot write {}", path.string()));
  return out;
}

std::string metric_cells(const EvalReport& r) {
  return fmt::format("{:.6f},{:.6f},{:.6f},{:.6f}", r[10].recall, r[20].recall, r[10].ndcg, r[20].ndcg);
}

}  // namespace

Dataset load_experiment_dataset(const ExperimentConfig& config) {
  if (!config.prepared.empty()) return load_dataset(config.prepared);
  if (config.interactions.empty()) {
    throw ConfigError(kModule, "no dataset configured: set data.interactions or data.prepared");
  }
  const auto raw = load_interactions(config.interactions);
  const auto filtered = kcore_filter(raw, config.k_core);
  if (filtered.empty()) {
    throw DataError(kModule, fmt::format("{}-core filtering removed every interaction", config.k_core));
  }
  return split(filtered, config.split);
}

void prepare_output_dir(const std::filesystem::path& dir, bool force) {
  namespace fs = std::filesystem;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ConfigError(kModule, fmt::format("{} exists and is not a directory", dir.string()));
    if (!fs::is_empty(dir) && !force) {
      throw ConfigError(kModule, fmt::format("output directory {} is not empty (pass --force to overwrite)", dir.string()));
    }
  }
  fs::create_directories(dir);
}

RunOutcome train_and_test(const Dataset& ds, const TrainConfig& config, const EpochCallback& on_epoch) {
  RunOutcome out;
  out.train = train_loop(ds, config, on_epoch);
  const auto adj = build_adjacency(BipartiteGraph::from_train(ds));
  const auto f = final_representation(adj, out.train.best, config.layers);
  out.val = evaluate(f, ds, Phase::val);
  out.test = evaluate(f, ds, Phase::test);
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::filesystem::path dir = config.output_dir;
  const auto ds = load_experiment_dataset(config);
  prepare_output_dir(dir, config.force);
  write_config(dir / "config.json", config);

  auto history = open_output(dir / "history.jsonl");
  auto outcome = train_and_test(ds, config.train, [&](const EpochRecord& r) {
    history << r.to_json().dump() << '\n' << std::flush;
    spdlog::info("[train] epoch {:>4}  total {:.6f}  val R@20 {:.4f}", r.epoch, r.loss.total, r.val_recall20);
  });

  save_checkpoint(dir / "checkpoint.json", {outcome.train.best, config.train.layers, ds.num_users});

  nlohmann::ordered_json metrics;
  metrics["variant"] = std::string(to_string(config.train.variant));
  metrics["best_epoch"] = outcome.train.best_epoch;
  metrics["epochs_run"] = outcome.train.history.size();
  metrics["val"] = outcome.val.to_json();
  metrics["test"] = outcome.test.to_json();
  open_output(dir / "metrics.json") << metrics.dump(2) << '\n';
  return outcome;
}

DatasetStats prepare_dataset(const ExperimentConfig& config) {
  config.split.validate();
  const auto ds = load_experiment_dataset(config);
  prepare_output_dir(config.output_dir, config.force);
  save_dataset(ds, config.output_dir);
  return dataset_stats(ds);
}

void write_ablation_row(std::ostream& out, const AblationRow& row) {
  out << row.variant << ',' << metric_cells(row.test) << '\n' << std::flush;
}

std::vector<AblationRow> run_ablation_suite(const ExperimentConfig& config) {
  config.validate();
  const auto ds = load_experiment_dataset(config);
  prepare_output_dir(config.output_dir, config.force);
  write_config(std::filesystem::path(config.output_dir) / "config.json", config);
  auto csv = open_output(std::filesystem::path(config.output_dir) / "ablation.csv");
  csv << kAblationHeader << '\n' << std::flush;

  std::vector<AblationRow> rows;
  auto run = [&](std::string label, TrainConfig tc) {
    spdlog::info("[ablate] {}", label);
    AblationRow row{std::move(label), train_and_test(ds, tc).test};
    write_ablation_row(csv, row);
    rows.push_back(std::move(row));
  };
  for (const auto v : {Variant::wgcl, Variant::all_pert, Variant::no_pert, Variant::lightgcn}) {
    TrainConfig tc = config.train;
    tc.variant = v;
    run(std::string(to_string(v)), tc);
  }
  for (const auto k : config.ablation_depths) {
    TrainConfig tc = config.train;
    tc.variant = Variant::wgcl;
    tc.depth = k;
    run(fmt::format("W-G{}", k), tc);
  }
  return rows;
}

std::vector<GridRow> run_grid(const ExperimentConfig& config) {
  config.validate();
  const auto ds = load_experiment_dataset(config);
  prepare_output_dir(config.output_dir, config.force);
  write_config(std::filesystem::path(config.output_dir) / "config.json", config);
  auto csv = open_output(std::filesystem::path(config.output_dir) / "grid.csv");
  csv << kGridHeader << '\n' << std::flush;

  auto axis = [](const auto& values, auto current) {
    using T = std::decay_t<decltype(current)>;
    return values.empty() ? std::vector<T>{current} : std::vector<T>(values.begin(), values.end());
  };
  std::vector<GridRow> rows;
  for (const double lc : axis(config.grid.lambda_c, config.train.lambda_c))
    for (const double tau : axis(config.grid.tau, config.train.tau))
      for (const std::size_t layers : axis(config.grid.layers, config.train.layers))
        for (const std::size_t depth : axis(config.grid.depth, config.train.depth)) {
          TrainConfig tc = config.train;
          tc.lambda_c = lc;
          tc.tau = tau;
          tc.layers = layers;
          tc.depth = depth;
          spdlog::info("[grid] lambda_c={} tau={} L={} K={}", lc, tau, layers, depth);
          const auto outcome = train_and_test(ds, tc);
          GridRow row{lc, tau, layers, depth, outcome.val, outcome.test};
          csv << fmt::format("{},{},{},{},{:.6f},{}\n", lc, tau, layers, depth, row.val[20].recall,
                             metric_cells(row.test))
              << std::flush;
          rows.push_back(std::move(row));
        }
  return rows;
}

}  // namespace wgcl
