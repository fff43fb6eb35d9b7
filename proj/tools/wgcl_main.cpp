// wgcl: command-line front end.
//
//   wgcl synth    generate the block-structured synthetic dataset
//   wgcl prepare  ingest, k-core filter and split a raw interaction file
//   wgcl train    train one model and evaluate its best checkpoint
//   wgcl evaluate score a saved checkpoint on the val or test split
//   wgcl ablate   variant / excitation-granularity comparison table
//   wgcl grid     hyper-parameter sweep
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.

#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wgcl/checkpoint.hpp"
#include "wgcl/config.hpp"
#include "wgcl/error.hpp"
#include "wgcl/eval.hpp"
#include "wgcl/experiment.hpp"
#include "wgcl/graph.hpp"
#include "wgcl/synthetic.hpp"

namespace {

struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;                          // key=value
  std::vector<std::pair<std::string, std::string>> flags;  // from per-key options
};

void add_config_flags(CLI::App& cmd, ConfigFlags& f) {
  cmd.add_option("-c,--config", f.file, "Flat JSON config file (dotted keys)");
  cmd.add_option("--set", f.sets, "Override any key: --set train.lr=0.001")->take_all();
  for (const auto& key : wgcl::config_keys()) {
    std::string names = "--" + std::string(key.name);
    if (!key.alias.empty()) names += ",--" + std::string(key.alias);
    const std::string name(key.name);
    const bool is_bool = key.domain == "true or false";
    if (is_bool) {
      cmd.add_flag_callback(names, [&f, name] { f.flags.emplace_back(name, "true"); }, std::string(key.domain));
    } else {
      cmd.add_option_function<std::string>(
          names, [&f, name](const std::string& v) { f.flags.emplace_back(name, v); }, std::string(key.domain));
    }
  }
}

wgcl::ExperimentConfig resolve(const ConfigFlags& f) {
  wgcl::ExperimentConfig cfg = f.file.empty() ? wgcl::ExperimentConfig{} : wgcl::load_config(f.file);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw wgcl::ConfigError("cli", "--set expects key=value, got '" + s + "'");
    wgcl::apply_override(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : f.flags) wgcl::apply_override(cfg, k, v);
  return cfg;
}

void print_report(const std::string& title, const wgcl::EvalReport& r) {
  std::cout << title << "  users=" << r.num_users;
  for (const auto& [k, m] : r.at) std::cout << fmt::format("  R@{}={:.4f} N@{}={:.4f}", k, m.recall, k, m.ndcg);
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted graph contrastive learning for collaborative filtering"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  wgcl::SyntheticSpec synth_spec;
  std::string synth_out = "synthetic.tsv";
  auto* synth = app.add_subcommand("synth", "Generate a block-structured synthetic dataset");
  synth->add_option("--users", synth_spec.num_users);
  synth->add_option("--items", synth_spec.num_items);
  synth->add_option("--groups", synth_spec.groups);
  synth->add_option("--per-user", synth_spec.per_user);
  synth->add_option("--in-group", synth_spec.in_group, "Probability a draw stays in the user's group");
  synth->add_option("--seed", synth_spec.seed);
  synth->add_option("-o,--out", synth_out, "Output TSV");

  ConfigFlags prepare_flags, train_flags, eval_flags, ablate_flags, grid_flags;
  auto* prepare = app.add_subcommand("prepare", "Ingest, k-core filter and split; writes output.dir");
  add_config_flags(*prepare, prepare_flags);
  auto* train = app.add_subcommand("train", "Train and evaluate one model");
  add_config_flags(*train, train_flags);
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  add_config_flags(*evaluate, eval_flags);
  std::string checkpoint_path, phase_name = "test", report_out;
  evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint.json or .bin")->required();
  evaluate->add_option("--phase", phase_name)->check(CLI::IsMember({"val", "test"}));
  evaluate->add_option("--report", report_out, "Write the report JSON here");
  auto* ablate = app.add_subcommand("ablate", "Variant and granularity comparison (ablation.csv)");
  add_config_flags(*ablate, ablate_flags);
  auto* grid = app.add_subcommand("grid", "Hyper-parameter grid (grid.csv)");
  add_config_flags(*grid, grid_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : wgcl::exit_code(wgcl::ErrorKind::config);
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (synth->parsed()) {
      const auto rows = wgcl::generate_synthetic(synth_spec);
      wgcl::write_interactions(synth_out, rows);
      std::cout << "wrote " << rows.size() << " interactions to " << synth_out << '\n';
    } else if (prepare->parsed()) {
      const auto stats = wgcl::prepare_dataset(resolve(prepare_flags));
      std::cout << fmt::format("users={} items={} interactions={} sparsity={}\n", stats.num_users,
                               stats.num_items, stats.num_interactions, stats.sparsity_percent());
    } else if (train->parsed()) {
      const auto cfg = resolve(train_flags);
      const auto outcome = wgcl::run_experiment(cfg);
      std::cout << "best epoch " << outcome.train.best_epoch << " of " << outcome.train.history.size() << '\n';
      print_report("val ", outcome.val);
      print_report("test", outcome.test);
    } else if (evaluate->parsed()) {
      const auto cfg = resolve(eval_flags);
      const auto ds = wgcl::load_experiment_dataset(cfg);
      const auto ckpt = wgcl::load_checkpoint(checkpoint_path);
      if (ckpt.params.num_nodes() != ds.num_nodes() || ckpt.num_users != ds.num_users) {
        throw wgcl::DataError("evaluate", "checkpoint does not match the configured dataset");
      }
      const auto adj = wgcl::build_adjacency(wgcl::BipartiteGraph::from_train(ds));
      const auto f = wgcl::final_representation(adj, ckpt.params, ckpt.layers);
      const auto report = wgcl::evaluate(f, ds, phase_name == "val" ? wgcl::Phase::val : wgcl::Phase::test);
      const auto text = report.to_json().dump(2);
      if (report_out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream(report_out) << text << '\n';
        print_report(phase_name, report);
      }
    } else if (ablate->parsed()) {
      const auto rows = wgcl::run_ablation_suite(resolve(ablate_flags));
      std::cout << wgcl::kAblationHeader << '\n';
      for (const auto& r : rows) wgcl::write_ablation_row(std::cout, r);
    } else if (grid->parsed()) {
      const auto rows = wgcl::run_grid(resolve(grid_flags));
      std::cout << "ran " << rows.size() << " grid points\n";
    }
  } catch (const wgcl::Error& e) {
    std::cerr << '[' << e.module() << "] " << e.what() << '\n';
    return wgcl::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "[wgcl] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
