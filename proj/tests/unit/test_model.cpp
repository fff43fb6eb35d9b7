#include <numeric>

#include <gtest/gtest.h>

#include "oracle/oracle.hpp"
#include "wgcl/error.hpp"
#include "wgcl/graph.hpp"
#include "wgcl/model.hpp"

namespace {

using wgcl::Matrix;
using wgcl::PerturbMode;

struct Instance {
  wgcl::NormalizedAdjacency adj;
  std::vector<wgcl::Interaction> edges;
  wgcl::ModelParams params;
};

Instance random_instance(std::uint64_t seed, std::uint32_t users, std::uint32_t items,
                         std::size_t d, std::size_t depth) {
  wgcl::Rng rng(seed);
  Instance in;
  in.edges = wgcl::oracle::random_edges(rng, users, items, 0.4);
  for (std::uint32_t u = 0; u < users; ++u) in.edges.push_back({u, u % items});
  std::sort(in.edges.begin(), in.edges.end());
  in.edges.erase(std::unique(in.edges.begin(), in.edges.end()), in.edges.end());
  in.adj = wgcl::build_adjacency({users, items, in.edges});
  in.params = wgcl::init_params(users + items, wgcl::GranularitySchedule::make(d, depth), seed);
  // Non-zero biases so the ladder is exercised off its symmetric point.
  for (auto& b : in.params.biases) b = wgcl::oracle::random_matrix(rng, b.size(), 1, -0.5, 0.5);
  return in;
}

TEST(Schedule, LadderForSixtyFour) {
  using V = std::vector<std::size_t>;
  EXPECT_EQ(wgcl::GranularitySchedule::make(64, 1).dims, (V{1, 64}));
  EXPECT_EQ(wgcl::GranularitySchedule::make(64, 2).dims, (V{1, 8, 64}));
  EXPECT_EQ(wgcl::GranularitySchedule::make(64, 3).dims, (V{1, 4, 16, 64}));
  EXPECT_EQ(wgcl::GranularitySchedule::make(64, 4).dims, (V{1, 3, 8, 23, 64}));
}

TEST(Schedule, ClampsToStrictIncrease) {
  using V = std::vector<std::size_t>;
  EXPECT_EQ(wgcl::GranularitySchedule::make(4, 3).dims, (V{1, 2, 3, 4}));
  const auto dims = wgcl::GranularitySchedule::make(5, 4).dims;
  for (std::size_t k = 1; k < dims.size(); ++k) EXPECT_LT(dims[k - 1], dims[k]);
  EXPECT_EQ(dims.back(), 5u);
}

TEST(Schedule, RejectsBadDepth) {
  EXPECT_THROW(wgcl::GranularitySchedule::make(64, 0), wgcl::ConfigError);
  EXPECT_THROW(wgcl::GranularitySchedule::make(64, 5), wgcl::ConfigError);
  EXPECT_THROW(wgcl::GranularitySchedule::make(3, 3), wgcl::ConfigError);
}

TEST(InitParams, ShapesBoundsDeterminism) {
  const auto schedule = wgcl::GranularitySchedule::make(16, 2);
  const auto p = wgcl::init_params(30, schedule, 5);
  EXPECT_EQ(p.base.rows(), 16);
  EXPECT_EQ(p.base.cols(), 30);
  EXPECT_EQ(p.dims(), schedule.dims);
  EXPECT_LE(p.base.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 46.0));
  EXPECT_LE(p.weights[0].cwiseAbs().maxCoeff(), std::sqrt(6.0 / 5.0));
  EXPECT_TRUE(p.biases[1].isZero(0.0));
  EXPECT_EQ(p, wgcl::init_params(30, schedule, 5));
  EXPECT_FALSE(p == wgcl::init_params(30, schedule, 6));
}

TEST(LayerViews, TwoSwapsRestoreSingleEdge) {
  const auto adj = wgcl::build_adjacency({1, 1, {{0, 0}}});
  auto p = wgcl::init_params(2, wgcl::GranularitySchedule::make(4, 1), 1);
  const auto views = wgcl::compute_layer_views(adj, p, 2);
  ASSERT_EQ(views.size(), 3u);
  EXPECT_EQ(views[2], views[0]);
  p.base.setZero();
  for (const auto& v : wgcl::compute_layer_views(adj, p, 2)) EXPECT_TRUE(v.isZero(0.0));
}

TEST(LayerViews, MatchDenseOracle) {
  const auto in = random_instance(3, 4, 6, 5, 2);
  const Matrix dense = wgcl::oracle::dense_adjacency(4, 6, in.edges);
  const auto views = wgcl::compute_layer_views(in.adj, in.params, 3);
  Matrix expect = in.params.base;
  for (std::size_t l = 1; l < views.size(); ++l) {
    expect = wgcl::oracle::dense_propagate(dense, expect);
    EXPECT_LE((views[l] - expect).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(AggregateMean, Examples) {
  const Matrix x = Matrix::Random(3, 4);
  const std::vector<Matrix> same{x, x, x};
  EXPECT_LE((wgcl::aggregate_mean(same) - x).cwiseAbs().maxCoeff(), 1e-15);
  const std::vector<Matrix> opposite{x, Matrix(-x)};
  EXPECT_TRUE(wgcl::aggregate_mean(opposite).isZero(0.0));
  const std::vector<Matrix> constants{Matrix::Constant(2, 2, 1), Matrix::Constant(2, 2, 2),
                                      Matrix::Constant(2, 2, 3)};
  EXPECT_EQ(wgcl::aggregate_mean(constants), Matrix::Constant(2, 2, 2.0));
  const std::vector<Matrix> mismatched{Matrix::Zero(2, 2), Matrix::Zero(2, 3)};
  EXPECT_THROW(wgcl::aggregate_mean(mismatched), std::invalid_argument);
}

TEST(Perturb, NoneIsBitwiseClean) {
  const auto in = random_instance(4, 3, 5, 6, 2);
  const auto views = wgcl::compute_layer_views(in.adj, in.params, 2);
  wgcl::Rng rng(1);
  const auto out = wgcl::perturb(views, PerturbMode::none, rng);
  const Matrix f = wgcl::aggregate_mean(views);
  EXPECT_EQ(out.bar, f);
  EXPECT_EQ(out.tilde, f);
  EXPECT_TRUE(out.noise.bar.empty());
  EXPECT_TRUE(out.noise.tilde.empty());
}

TEST(Perturb, FinalLayerShiftIsNoiseOverLayerCount) {
  const auto in = random_instance(5, 3, 5, 6, 2);
  for (std::size_t layers : {1u, 2u, 3u}) {
    const auto views = wgcl::compute_layer_views(in.adj, in.params, layers);
    wgcl::Rng rng(layers);
    const auto out = wgcl::perturb(views, PerturbMode::final_layer, rng);
    const Matrix f = wgcl::aggregate_mean(views);
    ASSERT_EQ(out.noise.bar.size(), 1u);
    const double scale = 1.0 / static_cast<double>(layers + 1);
    for (const auto* pair : {&out.bar, &out.tilde}) {
      const Matrix shift = *pair - f;
      EXPECT_GE(shift.minCoeff(), 0.0);
      EXPECT_LT(shift.maxCoeff(), scale);
    }
    EXPECT_LE((out.bar - f - out.noise.bar[0] * scale).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((out.tilde - f - out.noise.tilde[0] * scale).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NE(out.noise.bar[0], out.noise.tilde[0]);
  }
}

TEST(Perturb, AllLayersDrawsOnePerView) {
  const auto in = random_instance(6, 3, 5, 6, 2);
  const auto views = wgcl::compute_layer_views(in.adj, in.params, 2);
  wgcl::Rng rng(9);
  const auto out = wgcl::perturb(views, PerturbMode::all_layers, rng);
  ASSERT_EQ(out.noise.bar.size(), 3u);
  Matrix sum = Matrix::Zero(views[0].rows(), views[0].cols());
  for (const auto& n : out.noise.bar) sum += n;
  EXPECT_LE((out.bar - wgcl::aggregate_mean(views) - sum / 3.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Perturb, ReplayIsDeterministic) {
  const auto in = random_instance(7, 3, 5, 6, 2);
  const auto views = wgcl::compute_layer_views(in.adj, in.params, 2);
  wgcl::Rng a(33);
  wgcl::Rng b(33);
  const auto x = wgcl::perturb(views, PerturbMode::final_layer, a);
  const auto y = wgcl::perturb(views, PerturbMode::final_layer, b);
  EXPECT_EQ(x.bar, y.bar);
  EXPECT_EQ(x.tilde, y.tilde);
  const auto z = wgcl::perturb_with_noise(views, PerturbMode::final_layer, x.noise);
  EXPECT_EQ(z.bar, x.bar);
  EXPECT_EQ(z.tilde, x.tilde);
}

TEST(Squeeze, ColumnMeans) {
  Matrix v(4, 3);
  v << 1, 0, 7, 2, 0, 7, 3, 0, 7, 4, 0, 7;
  const auto s = wgcl::squeeze(v);
  EXPECT_DOUBLE_EQ(s(0), 2.5);
  EXPECT_DOUBLE_EQ(s(1), 0.0);
  EXPECT_DOUBLE_EQ(s(2), 7.0);
}

TEST(Excite, ZeroNetworkGivesHalf) {
  auto p = wgcl::init_params(4, wgcl::GranularitySchedule::make(8, 3), 2);
  for (auto& w : p.weights) w.setZero();
  wgcl::RowVector s(4);
  s << 1, -2, 3, 0.5;
  EXPECT_EQ(wgcl::excite(s, p), Matrix::Constant(8, 4, 0.5));
}

TEST(Excite, SingleLevelByHand) {
  auto p = wgcl::init_params(1, wgcl::GranularitySchedule::make(2, 1), 2);
  p.weights[0].setConstant(0.5);
  p.biases[0].setConstant(-1.0);
  wgcl::RowVector s(1);
  s << 2.0;
  EXPECT_EQ(wgcl::excite(s, p), Matrix::Constant(2, 1, 0.5));
}

TEST(Excite, TwoLevelMatchesDenseOracle) {
  auto p = random_instance(8, 1, 2, 6, 2).params;
  wgcl::Rng rng(4);
  p.base = wgcl::oracle::random_matrix(rng, 6, 3, -1, 1);
  // Zero adjacency, L = 1, no noise: the oracle gates base / 2.
  const auto dense =
      wgcl::oracle::dense_forward(Matrix::Zero(3, 3), p, 1, Matrix::Zero(6, 3), Matrix::Zero(6, 3));
  const Matrix gates = wgcl::excite(wgcl::squeeze(Matrix(p.base / 2.0)), p);
  EXPECT_LE((gates - dense.gate_bar).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Recalibrate, HandCase) {
  Matrix t(2, 2);
  t << 0.2, 0.4, 0.6, 0.8;
  Matrix f(2, 2);
  f << 1, 2, 3, 4;
  Matrix r(2, 2);
  r << 0.2, 0.8, 1.8, 3.2;
  EXPECT_LE((wgcl::recalibrate(t, f) - r).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(wgcl::recalibrate(Matrix::Constant(2, 2, 0.5), f), f / 2.0);
  EXPECT_THROW(wgcl::recalibrate(t, Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(Forward, NoneWithZeroLadderHalvesF) {
  auto in = random_instance(9, 3, 4, 6, 3);
  for (auto& w : in.params.weights) w.setZero();
  for (auto& b : in.params.biases) b.setZero();
  wgcl::Rng rng(1);
  const auto st = wgcl::forward(in.adj, in.params, {2, PerturbMode::none, true}, rng);
  EXPECT_EQ(st.bar.recalibrated, st.aggregated * 0.5);
  EXPECT_EQ(st.tilde.recalibrated, st.aggregated * 0.5);
}

TEST(Forward, MatchesDenseMonolith) {
  const auto in = random_instance(10, 5, 7, 8, 2);
  wgcl::Rng rng(77);
  const auto st = wgcl::forward(in.adj, in.params, {2, PerturbMode::final_layer, true}, rng);
  const auto dense = wgcl::oracle::dense_forward(wgcl::oracle::dense_adjacency(5, 7, in.edges),
                                                 in.params, 2, st.noise.bar[0], st.noise.tilde[0]);
  auto gap = [](const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); };
  EXPECT_LE(gap(st.aggregated, dense.aggregated), 1e-10);
  EXPECT_LE(gap(st.bar.perturbed, dense.bar), 1e-10);
  EXPECT_LE(gap(st.tilde.perturbed, dense.tilde), 1e-10);
  EXPECT_LE(gap(st.bar.gates(), dense.gate_bar), 1e-10);
  EXPECT_LE(gap(st.tilde.gates(), dense.gate_tilde), 1e-10);
  EXPECT_LE(gap(st.bar.recalibrated, dense.r_bar), 1e-10);
  EXPECT_LE(gap(st.tilde.recalibrated, dense.r_tilde), 1e-10);
}

TEST(Forward, SameSeedSameState) {
  const auto in = random_instance(11, 4, 4, 6, 2);
  wgcl::Rng a(5);
  wgcl::Rng b(5);
  const auto x = wgcl::forward(in.adj, in.params, {}, a);
  const auto y = wgcl::forward(in.adj, in.params, {}, b);
  EXPECT_EQ(x.bar.recalibrated, y.bar.recalibrated);
  EXPECT_EQ(x.tilde.recalibrated, y.tilde.recalibrated);
  EXPECT_EQ(x.aggregated, wgcl::final_representation(in.adj, in.params, 2));
}

TEST(ForwardProperty, GatesSignsAndSharedLowerLayers) {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto in = random_instance(seed, 2 + seed % 5, 3 + seed % 4, 4 + seed % 5, 1 + seed % 3);
    wgcl::Rng rng(seed);
    const auto st = wgcl::forward(in.adj, in.params, {1 + seed % 3, PerturbMode::final_layer, true}, rng);
    for (const auto* b : {&st.bar, &st.tilde}) {
      ASSERT_GT(b->gates().minCoeff(), 0.0);
      ASSERT_LT(b->gates().maxCoeff(), 1.0);
      for (Eigen::Index c = 0; c < b->perturbed.cols(); ++c)
        for (Eigen::Index r = 0; r < b->perturbed.rows(); ++r) {
          const double f = b->perturbed(r, c);
          const double q = b->recalibrated(r, c);
          ASSERT_EQ((f > 0) - (f < 0), (q > 0) - (q < 0));
        }
    }
    for (const auto& n : st.noise.bar) {
      ASSERT_GE(n.minCoeff(), 0.0);
      ASSERT_LT(n.maxCoeff(), 1.0);
    }
    // Only the final-layer term separates the branches: re-aggregating with
    // the final view swapped must reproduce each branch exactly.
    auto views = st.layer_views;
    views.back() += st.noise.bar[0];
    ASSERT_LE((wgcl::aggregate_mean(views) - st.bar.perturbed).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ExciteProperty, NodeWisePermutation) {
  const auto in = random_instance(12, 1, 1, 8, 3);
  wgcl::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(10));
    wgcl::RowVector s = wgcl::oracle::random_matrix(rng, 1, n, -2, 2);
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    rng.shuffle(std::span<Eigen::Index>(perm));
    wgcl::RowVector sp(n);
    for (Eigen::Index c = 0; c < n; ++c) sp(perm[c]) = s(c);
    const Matrix t = wgcl::excite(s, in.params);
    const Matrix tp = wgcl::excite(sp, in.params);
    for (Eigen::Index c = 0; c < n; ++c) ASSERT_EQ(tp.col(perm[c]), t.col(c));
  }
}

}  // namespace
