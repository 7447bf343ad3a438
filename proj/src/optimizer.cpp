// SPDX-License-Identifier: Apache-2.0
#include "ibpm/optimizer.hpp"

#include <cmath>

namespace ibpm::nn {

void adam_step(ParamStore& store, const Gradients& grads, const AdamConfig& config) {
  for (const auto& [name, g] : grads) {
    if (!store.contains(name)) throw InvalidArgument("gradient for unknown parameter '" + name + "'");
    require_same_shape(store.get(name), g, "adam_step");
  }
  const std::uint64_t t = ++store.step();
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (auto& [name, slot] : store.slots()) {
    auto it = grads.find(name);
    const Tensor* g = it == grads.end() ? nullptr : &it->second;
    auto value = slot.value.data();
    auto m = slot.first_moment.data();
    auto v = slot.second_moment.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double gi = g ? (*g)[i] : 0.0;
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * gi;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * gi * gi;
      value[i] -= config.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.eps);
    }
  }
}

void accumulate(Gradients& into, const Gradients& from) {
  for (const auto& [name, g] : from) {
    auto it = into.find(name);
    if (it == into.end()) {
      into.emplace(name, g);
    } else {
      it->second += g;
    }
  }
}

double grad_norm(const Gradients& grads) {
  double s = 0.0;
  for (const auto& [name, g] : grads)
    for (double x : g.data()) s += x * x;
  return std::sqrt(s);
}

void clip_grad_norm(Gradients& grads, double max_norm) {
  const double norm = grad_norm(grads);
  if (norm <= max_norm || norm == 0.0) return;
  const double f = max_norm / norm;
  for (auto& [name, g] : grads)
    for (double& x : g.data()) x *= f;
}

}  // namespace ibpm::nn
