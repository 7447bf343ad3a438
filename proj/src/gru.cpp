// SPDX-License-Identifier: Apache-2.0
#include "ibpm/gru.hpp"

namespace ibpm::nn {

void GruCell::register_params(ParamStore& store, Rng& rng) const {
  for (const char* gate : {"z", "r", "h"}) {
    store.add_glorot(prefix_ + ".W" + gate, input_dim_, hidden_dim_, rng);
    store.add_glorot(prefix_ + ".U" + gate, hidden_dim_, hidden_dim_, rng);
    store.add_zeros(prefix_ + ".b" + gate, {1, hidden_dim_});
  }
}

Var GruCell::step(Tape& tape, Var x, Var h) const {
  const Tensor& xv = x.value();
  const Tensor& hv = h.value();
  if (xv.cols() != input_dim_ || hv.cols() != hidden_dim_ || xv.rows() != hv.rows()) {
    throw ShapeError("gru step expects [n x " + std::to_string(input_dim_) + "] and [n x " +
                     std::to_string(hidden_dim_) + "], got " + xv.shape_string() + " and " +
                     hv.shape_string());
  }
  auto gate = [&](const char* g, Var hin) {
    const std::string s(g);
    return add_row(add(matmul(x, tape.param(prefix_ + ".W" + s)), matmul(hin, tape.param(prefix_ + ".U" + s))),
                   tape.param(prefix_ + ".b" + s));
  };
  Var z = sigmoid(gate("z", h));
  Var r = sigmoid(gate("r", h));
  Var candidate = tanh(gate("h", mul(r, h)));
  return add(mul(one_minus(z), h), mul(z, candidate));
}

}  // namespace ibpm::nn
