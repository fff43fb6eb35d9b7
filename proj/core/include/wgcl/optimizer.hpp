#pragma once

#include <cstddef>

#include "wgcl/model.hpp"
#include "wgcl/objective.hpp"

namespace wgcl {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  Gradients first;   // m
  Gradients second;  // v

  static AdamState for_params(const ModelParams& params);
};

// One bias-corrected Adam update, in place. With update_excitation = false
// the ladder parameters (and their moments) are left untouched.
// Throws NumericError naming the parameter group and index of the first
// non-finite gradient entry; nothing is modified in that case.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
               bool update_excitation = true);

}  // namespace wgcl
