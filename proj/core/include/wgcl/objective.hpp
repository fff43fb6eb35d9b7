#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "wgcl/graph.hpp"
#include "wgcl/model.hpp"
#include "wgcl/types.hpp"

namespace wgcl {

struct Triplet {
  std::uint32_t user = 0;
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

using Batch = std::vector<Triplet>;

enum class PoolMode { in_batch, full };

std::string_view to_string(PoolMode mode) noexcept;

// Contrastive negative pools: user ids and item ids (not node indices).
struct NegativePools {
  std::vector<std::uint32_t> users;
  std::vector<std::uint32_t> items;

  // Unique batch users; unique positive and negative items. Sorted.
  static NegativePools in_batch(std::span<const Triplet> batch);
  static NegativePools full(std::uint32_t num_users, std::uint32_t num_items);
  static NegativePools make(PoolMode mode, std::span<const Triplet> batch,
                            std::uint32_t num_users, std::uint32_t num_items);
};

// rec already includes reg (the L2 term belongs to the ranking loss);
// total = rec + lambda_c * cl.
struct LossBreakdown {
  double rec = 0.0;
  double cl = 0.0;
  double reg = 0.0;
  double total = 0.0;

  LossBreakdown& operator+=(const LossBreakdown& other);
  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct ObjectiveConfig {
  double reg = 1e-4;       // lambda
  double lambda_c = 0.1;
  double tau = 0.2;
};

struct Gradients {
  Matrix base;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static Gradients zeros_like(const ModelParams& params);
  bool all_finite() const;
};

struct BprResult {
  double value = 0.0;          // log-loss sum + reg
  double reg = 0.0;            // lambda * sum of squared ego norms
  Matrix grad_aggregated;      // d value / d F
  Matrix grad_base;            // d reg / d E^(0)
};

// sum over triplets of softplus(-(y_up - y_un)) + lambda * (|e_u|^2 + |e_p|^2 + |e_n|^2),
// scores are dot products of F columns, the L2 term uses E^(0) columns.
BprResult bpr_loss(const Matrix& aggregated, std::span<const Triplet> batch, double lambda,
                   const Matrix& base, std::uint32_t num_users);

struct InfoNceResult {
  double value = 0.0;
  double user_term = 0.0;
  double item_term = 0.0;
  Matrix grad_bar;
  Matrix grad_tilde;
};

// Two-sided InfoNCE over the given pools; row-wise log-sum-exp is max-shifted.
// Throws ConfigError when tau <= 0.
InfoNceResult infonce_loss(const Matrix& bar, const Matrix& tilde, const NegativePools& pools,
                           std::uint32_t num_users, double tau);

struct LossAndGrads {
  LossBreakdown loss;
  Gradients grads;
};

// Exact reverse-mode derivative of rec + lambda_c * cl through recalibration,
// excitation, squeeze, aggregation and all propagation layers. The recorded
// noise is a constant.
LossAndGrads total_loss_and_grads(const ForwardState& state, const NormalizedAdjacency& adj,
                                  const ModelParams& params, std::span<const Triplet> batch,
                                  const NegativePools& pools, const ObjectiveConfig& config);

// Same value as total_loss_and_grads(...).loss without any backward work.
LossBreakdown total_loss(const ForwardState& state, const NormalizedAdjacency& adj,
                         const ModelParams& params, std::span<const Triplet> batch,
                         const NegativePools& pools, const ObjectiveConfig& config);

}  // namespace wgcl
