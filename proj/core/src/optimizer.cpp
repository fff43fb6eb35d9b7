#include "wgcl/optimizer.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "wgcl/error.hpp"

namespace wgcl {
namespace {

template <typename Dense>
void check_finite(const Dense& g, const std::string& group) {
  for (Eigen::Index c = 0; c < g.cols(); ++c)
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      if (!std::isfinite(g(r, c))) {
        throw NumericError("train", fmt::format("non-finite gradient {} in {} at ({}, {})", g(r, c),
                                                group, r, c));
      }
}

template <typename Dense>
void update(Dense& param, const Dense& grad, Dense& m, Dense& v, const AdamState& s, double lr,
            double correction1, double correction2) {
  m = s.beta1 * m + (1.0 - s.beta1) * grad;
  v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  param.array() -= lr * (m.array() / correction1) /
                   ((v.array() / correction2).sqrt() + s.epsilon);
}

}  // namespace

AdamState AdamState::for_params(const ModelParams& params) {
  AdamState s;
  s.first = Gradients::zeros_like(params);
  s.second = Gradients::zeros_like(params);
  return s;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
               bool update_excitation) {
  if (grads.base.rows() != params.base.rows() || grads.base.cols() != params.base.cols() ||
      grads.weights.size() != params.weights.size() || grads.biases.size() != params.biases.size()) {
    throw std::invalid_argument("adam_step: gradient shapes do not match parameters");
  }
  check_finite(grads.base, "base_embeddings");
  if (update_excitation) {
    for (std::size_t k = 0; k < grads.weights.size(); ++k) {
      check_finite(grads.weights[k], fmt::format("excitation_weights[{}]", k));
      check_finite(grads.biases[k], fmt::format("excitation_biases[{}]", k));
    }
  }

  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  update(params.base, grads.base, state.first.base, state.second.base, state, lr, c1, c2);
  if (!update_excitation) return;
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    update(params.weights[k], grads.weights[k], state.first.weights[k], state.second.weights[k],
           state, lr, c1, c2);
    update(params.biases[k], grads.biases[k], state.first.biases[k], state.second.biases[k],
           state, lr, c1, c2);
  }
}

}  // namespace wgcl
