// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ibpm/autodiff.hpp"

namespace ibpm::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update. Every gradient name must be a parameter of
// the store; parameters without a gradient still advance their moments as if
// the gradient were zero.
void adam_step(ParamStore& store, const Gradients& grads, const AdamConfig& config);

// Elementwise sum of two gradient maps (b into a).
void accumulate(Gradients& into, const Gradients& from);

// Global L2 norm, for logging and clipping.
double grad_norm(const Gradients& grads);
void clip_grad_norm(Gradients& grads, double max_norm);

}  // namespace ibpm::nn
