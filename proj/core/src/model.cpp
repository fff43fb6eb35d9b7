#include "wgcl/model.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "wgcl/error.hpp"

namespace wgcl {
namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  // Column-major order so that draws are reproducible across layouts.
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
}

void fill_unit_noise(Matrix& m, Rng& rng) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform();
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ContrastiveBranch make_branch(Matrix perturbed, const ModelParams& params) {
  ContrastiveBranch b;
  b.perturbed = std::move(perturbed);
  b.summary = squeeze(b.perturbed);
  b.excitation = excite_traced(b.summary, params);
  b.recalibrated = recalibrate(b.gates(), b.perturbed);
  return b;
}

}  // namespace

GranularitySchedule GranularitySchedule::make(std::size_t dim, std::size_t depth) {
  if (depth < 1 || depth > 4) {
    throw ConfigError("model", fmt::format("excitation depth K must be in 1..4, got {}", depth));
  }
  if (dim < depth + 1) {
    throw ConfigError("model", fmt::format("embedding size {} too small for a {}-level ladder", dim, depth));
  }
  GranularitySchedule s;
  s.dim = dim;
  s.depth = depth;
  s.dims.assign(depth + 1, 0);
  s.dims[0] = 1;
  for (std::size_t k = 1; k < depth; ++k) {
    const double raw = std::pow(static_cast<double>(dim), static_cast<double>(k) / depth);
    s.dims[k] = std::max(static_cast<std::size_t>(std::llround(raw)), s.dims[k - 1] + 1);
  }
  s.dims[depth] = dim;
  if (depth > 1 && s.dims[depth - 1] >= dim) {
    throw ConfigError("model", fmt::format("cannot build a strictly increasing ladder to {}", dim));
  }
  return s;
}

std::vector<std::size_t> ModelParams::dims() const {
  std::vector<std::size_t> out{1};
  for (const auto& w : weights) out.push_back(static_cast<std::size_t>(w.rows()));
  return out;
}

bool ModelParams::all_finite() const {
  if (!base.allFinite()) return false;
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (a.base.rows() != b.base.rows() || a.base.cols() != b.base.cols() || a.base != b.base) return false;
  if (a.weights.size() != b.weights.size() || a.biases.size() != b.biases.size()) return false;
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    if (a.weights[k].rows() != b.weights[k].rows() || a.weights[k].cols() != b.weights[k].cols() ||
        a.weights[k] != b.weights[k])
      return false;
    if (a.biases[k].size() != b.biases[k].size() || a.biases[k] != b.biases[k]) return false;
  }
  return true;
}

ModelParams init_params(std::size_t num_nodes, const GranularitySchedule& schedule,
                        std::uint64_t seed) {
  Rng rng(seed);
  ModelParams p;
  const auto d = static_cast<Eigen::Index>(schedule.dim);
  p.base.resize(d, static_cast<Eigen::Index>(num_nodes));
  fill_uniform(p.base, std::sqrt(6.0 / static_cast<double>(num_nodes + schedule.dim)), rng);
  for (std::size_t k = 1; k < schedule.dims.size(); ++k) {
    const auto rows = static_cast<Eigen::Index>(schedule.dims[k]);
    const auto cols = static_cast<Eigen::Index>(schedule.dims[k - 1]);
    Matrix w(rows, cols);
    fill_uniform(w, std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(rows));
  }
  return p;
}

std::string_view to_string(PerturbMode mode) noexcept {
  switch (mode) {
    case PerturbMode::final_layer: return "final";
    case PerturbMode::all_layers: return "all";
    case PerturbMode::none: return "none";
  }
  return "?";
}

std::vector<Matrix> compute_layer_views(const NormalizedAdjacency& adj,
                                        const ModelParams& params, std::size_t layers) {
  if (layers < 1) throw ConfigError("model", "layer count L must be >= 1");
  std::vector<Matrix> views;
  views.reserve(layers + 1);
  views.push_back(params.base);
  for (std::size_t l = 1; l <= layers; ++l) views.push_back(propagate(adj, views.back()));
  return views;
}

Matrix aggregate_mean(std::span<const Matrix> views) {
  if (views.empty()) throw std::invalid_argument("aggregate_mean: no views");
  Matrix sum = views.front();
  for (std::size_t l = 1; l < views.size(); ++l) {
    if (views[l].rows() != sum.rows() || views[l].cols() != sum.cols()) {
      throw std::invalid_argument("aggregate_mean: views differ in shape");
    }
    sum += views[l];
  }
  return sum / static_cast<double>(views.size());
}

NoiseRecord draw_noise(PerturbMode mode, std::size_t layers, Eigen::Index rows,
                       Eigen::Index cols, Rng& rng) {
  NoiseRecord noise;
  const std::size_t count = mode == PerturbMode::final_layer ? 1
                            : mode == PerturbMode::all_layers ? layers + 1
                                                              : 0;
  for (auto* branch : {&noise.bar, &noise.tilde}) {
    for (std::size_t i = 0; i < count; ++i) {
      Matrix m(rows, cols);
      fill_unit_noise(m, rng);
      branch->push_back(std::move(m));
    }
  }
  return noise;
}

PerturbedViews perturb_with_noise(std::span<const Matrix> views, PerturbMode mode,
                                  NoiseRecord noise) {
  if (views.empty()) throw std::invalid_argument("perturb: no views");
  const std::size_t layers = views.size() - 1;
  const auto count = static_cast<double>(views.size());

  Matrix sum = views.front();
  for (std::size_t l = 1; l < views.size(); ++l) sum += views[l];

  PerturbedViews out;
  switch (mode) {
    case PerturbMode::none:
      out.bar = sum / count;
      out.tilde = out.bar;
      break;
    case PerturbMode::final_layer:
    case PerturbMode::all_layers: {
      const std::size_t expected = mode == PerturbMode::final_layer ? 1 : layers + 1;
      if (noise.bar.size() != expected || noise.tilde.size() != expected) {
        throw std::invalid_argument(fmt::format("perturb: expected {} noise matrices per branch", expected));
      }
      // Only E^(L) (or every E^(l)) picks up noise; all other terms are shared.
      Matrix bar = sum;
      Matrix tilde = sum;
      for (std::size_t i = 0; i < expected; ++i) {
        bar += noise.bar[i];
        tilde += noise.tilde[i];
      }
      out.bar = bar / count;
      out.tilde = tilde / count;
      break;
    }
  }
  out.noise = std::move(noise);
  return out;
}

PerturbedViews perturb(std::span<const Matrix> views, PerturbMode mode, Rng& rng) {
  if (views.empty()) throw std::invalid_argument("perturb: no views");
  auto noise = draw_noise(mode, views.size() - 1, views.front().rows(), views.front().cols(), rng);
  return perturb_with_noise(views, mode, std::move(noise));
}

RowVector squeeze(const Matrix& view) {
  return view.colwise().sum() / static_cast<double>(view.rows());
}

ExcitationTrace excite_traced(const RowVector& summary, const ModelParams& params) {
  ExcitationTrace t;
  t.inputs.reserve(params.depth() + 1);
  t.pre.reserve(params.depth());
  t.inputs.emplace_back(summary);
  for (std::size_t k = 0; k < params.depth(); ++k) {
    const auto& w = params.weights[k];
    if (w.cols() != t.inputs.back().rows()) {
      throw std::invalid_argument(fmt::format("excite: layer {} expects {} inputs, got {}", k + 1,
                                              w.cols(), t.inputs.back().rows()));
    }
    Matrix z = w * t.inputs.back();
    z.colwise() += params.biases[k];
    const bool top = k + 1 == params.depth();
    Matrix h = top ? Matrix(z.unaryExpr([](double x) { return sigmoid(x); }))
                   : Matrix(z.cwiseMax(0.0));
    t.pre.push_back(std::move(z));
    t.inputs.push_back(std::move(h));
  }
  return t;
}

Matrix excite(const RowVector& summary, const ModelParams& params) {
  return std::move(excite_traced(summary, params).inputs.back());
}

Matrix recalibrate(const Matrix& gates, const Matrix& perturbed) {
  if (gates.rows() != perturbed.rows() || gates.cols() != perturbed.cols()) {
    throw std::invalid_argument("recalibrate: gate and view shapes differ");
  }
  return gates.cwiseProduct(perturbed);
}

ForwardState forward_with_noise(const NormalizedAdjacency& adj, const ModelParams& params,
                                const ForwardOptions& options, NoiseRecord noise) {
  ForwardState s;
  s.options = options;
  s.layer_views = compute_layer_views(adj, params, options.layers);
  s.aggregated = aggregate_mean(s.layer_views);
  if (!options.contrastive) return s;

  auto views = perturb_with_noise(s.layer_views, options.mode, std::move(noise));
  s.has_contrastive = true;
  s.bar = make_branch(std::move(views.bar), params);
  s.tilde = make_branch(std::move(views.tilde), params);
  s.noise = std::move(views.noise);
  return s;
}

ForwardState forward(const NormalizedAdjacency& adj, const ModelParams& params,
                     const ForwardOptions& options, Rng& rng) {
  NoiseRecord noise;
  if (options.contrastive) {
    noise = draw_noise(options.mode, options.layers, static_cast<Eigen::Index>(params.dim()),
                       static_cast<Eigen::Index>(params.num_nodes()), rng);
  }
  return forward_with_noise(adj, params, options, std::move(noise));
}

Matrix final_representation(const NormalizedAdjacency& adj, const ModelParams& params,
                            std::size_t layers) {
  return aggregate_mean(compute_layer_views(adj, params, layers));
}

}  // namespace wgcl
