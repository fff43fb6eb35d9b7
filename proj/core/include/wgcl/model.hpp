#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "wgcl/graph.hpp"
#include "wgcl/random.hpp"
#include "wgcl/types.hpp"

namespace wgcl {

// Widths of the excitation ladder: dims[0] = 1, dims[K] = d, and
// dims[k] = round(d^(k/K)) in between, bumped to stay strictly increasing.
struct GranularitySchedule {
  std::size_t dim = 64;
  std::size_t depth = 3;
  std::vector<std::size_t> dims;

  // Throws ConfigError when depth is outside [1, 4] or d is too small to
  // hold a strictly increasing ladder (d < depth + 1).
  static GranularitySchedule make(std::size_t dim, std::size_t depth);
};

struct ModelParams {
  Matrix base;                   // E^(0), d x |N|
  std::vector<Matrix> weights;   // W_k, dims[k] x dims[k-1]
  std::vector<Vector> biases;    // b_k, dims[k]

  std::size_t dim() const noexcept { return static_cast<std::size_t>(base.rows()); }
  std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(base.cols()); }
  std::size_t depth() const noexcept { return weights.size(); }
  std::vector<std::size_t> dims() const;
  bool all_finite() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

// Xavier-uniform for embeddings and ladder weights; zero biases.
ModelParams init_params(std::size_t num_nodes, const GranularitySchedule& schedule,
                        std::uint64_t seed);

enum class PerturbMode { final_layer, all_layers, none };

std::string_view to_string(PerturbMode mode) noexcept;

// E^(0) = base, E^(l) = propagate(E^(l-1)); returns L + 1 views.
std::vector<Matrix> compute_layer_views(const NormalizedAdjacency& adj,
                                        const ModelParams& params, std::size_t layers);

Matrix aggregate_mean(std::span<const Matrix> views);

// Noise drawn for one forward pass. For final_layer each branch holds one
// matrix (added to E^(L)); for all_layers, one per layer; for none, nothing.
struct NoiseRecord {
  std::vector<Matrix> bar;
  std::vector<Matrix> tilde;
};

struct PerturbedViews {
  Matrix bar;
  Matrix tilde;
  NoiseRecord noise;
};

NoiseRecord draw_noise(PerturbMode mode, std::size_t layers, Eigen::Index rows,
                       Eigen::Index cols, Rng& rng);

PerturbedViews perturb(std::span<const Matrix> views, PerturbMode mode, Rng& rng);

// Deterministic replay of a recorded draw.
PerturbedViews perturb_with_noise(std::span<const Matrix> views, PerturbMode mode,
                                  NoiseRecord noise);

// Column means: S(n) = (1/d) sum_k view(k, n).
RowVector squeeze(const Matrix& view);

// Activations of every ladder stage for one branch. inputs[0] is S; for
// k >= 1 pre[k-1] = W_k h_{k-1} + b_k and inputs[k] = act(pre[k-1]), where
// act is ReLU below the top and sigmoid at the top. inputs.back() is T.
struct ExcitationTrace {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre;

  const Matrix& gates() const { return inputs.back(); }
};

ExcitationTrace excite_traced(const RowVector& summary, const ModelParams& params);
Matrix excite(const RowVector& summary, const ModelParams& params);

// R = T .* F_pert. Throws std::invalid_argument on shape mismatch.
Matrix recalibrate(const Matrix& gates, const Matrix& perturbed);

struct ForwardOptions {
  std::size_t layers = 2;
  PerturbMode mode = PerturbMode::final_layer;
  // When false only the clean aggregate is produced (plain LightGCN).
  bool contrastive = true;
};

struct ContrastiveBranch {
  Matrix perturbed;      // F-bar or F-tilde
  RowVector summary;     // S
  ExcitationTrace excitation;
  Matrix recalibrated;   // R

  const Matrix& gates() const { return excitation.gates(); }
};

struct ForwardState {
  ForwardOptions options;
  std::vector<Matrix> layer_views;
  Matrix aggregated;     // F
  bool has_contrastive = false;
  ContrastiveBranch bar;
  ContrastiveBranch tilde;
  NoiseRecord noise;
};

ForwardState forward(const NormalizedAdjacency& adj, const ModelParams& params,
                     const ForwardOptions& options, Rng& rng);

ForwardState forward_with_noise(const NormalizedAdjacency& adj, const ModelParams& params,
                                const ForwardOptions& options, NoiseRecord noise);

// Clean F used for scoring.
Matrix final_representation(const NormalizedAdjacency& adj, const ModelParams& params,
                            std::size_t layers);

}  // namespace wgcl
