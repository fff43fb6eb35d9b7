#include <map>

#include <benchmark/benchmark.h>

#include "wgcl/dataset.hpp"
#include "wgcl/eval.hpp"
#include "wgcl/graph.hpp"
#include "wgcl/model.hpp"
#include "wgcl/objective.hpp"
#include "wgcl/synthetic.hpp"
#include "wgcl/train.hpp"

namespace {

struct Fixture {
  wgcl::Dataset ds;
  wgcl::NormalizedAdjacency adj;
  wgcl::ModelParams params;
};

// Synthetic graph with 20 interactions per user; scale multiplies users and items.
const Fixture& fixture(int scale) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(scale);
  if (it != cache.end()) return it->second;
  wgcl::SyntheticSpec spec;
  spec.num_users = 200 * static_cast<std::uint32_t>(scale);
  spec.num_items = 300 * static_cast<std::uint32_t>(scale);
  Fixture f;
  f.ds = wgcl::split(wgcl::generate_synthetic(spec), {});
  f.adj = wgcl::build_adjacency(wgcl::BipartiteGraph::from_train(f.ds));
  f.params = wgcl::init_params(f.ds.num_nodes(), wgcl::GranularitySchedule::make(64, 3), 1);
  return cache.emplace(scale, std::move(f)).first->second;
}

void BM_Propagate(benchmark::State& state) {
  const auto& f = fixture(static_cast<int>(state.range(0)));
  wgcl::Matrix out(f.params.base.rows(), f.params.base.cols());
  for (auto _ : state) {
    wgcl::propagate_into(f.adj, f.params.base, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.adj.nnz()));
}
BENCHMARK(BM_Propagate)->Arg(1)->Arg(10);

void BM_Forward(benchmark::State& state) {
  const auto& f = fixture(static_cast<int>(state.range(0)));
  wgcl::Rng rng(3);
  for (auto _ : state) {
    auto st = wgcl::forward(f.adj, f.params, {}, rng);
    benchmark::DoNotOptimize(st.bar.recalibrated.data());
  }
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_LossAndGrads(benchmark::State& state) {
  const auto& f = fixture(static_cast<int>(state.range(0)));
  wgcl::Rng rng(5);
  const auto batches = wgcl::sample_negatives(f.ds, 4096, rng);
  const auto& batch = batches.front();
  const auto st = wgcl::forward(f.adj, f.params, {}, rng);
  const auto pools = wgcl::NegativePools::in_batch(batch);
  for (auto _ : state) {
    auto out = wgcl::total_loss_and_grads(st, f.adj, f.params, batch, pools, {});
    benchmark::DoNotOptimize(out.grads.base.data());
  }
}
BENCHMARK(BM_LossAndGrads)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto& f = fixture(static_cast<int>(state.range(0)));
  const auto rep = wgcl::final_representation(f.adj, f.params, 2);
  for (auto _ : state) {
    auto report = wgcl::evaluate(rep, f.ds, wgcl::Phase::test);
    benchmark::DoNotOptimize(report.num_users);
  }
}
BENCHMARK(BM_Evaluate)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
