// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ibpm/autodiff.hpp"

namespace ibpm::nn {

// Gated recurrent unit over row batches:
//   z  = sigmoid(x Wz + h Uz + bz)
//   r  = sigmoid(x Wr + h Ur + br)
//   h~ = tanh(x Wh + (r * h) Uh + bh)
//   h' = (1 - z) * h + z * h~
// Parameters live in a ParamStore under "<prefix>.Wz", "<prefix>.Uz", ...
class GruCell {
 public:
  GruCell() = default;
  GruCell(std::string prefix, std::size_t input_dim, std::size_t hidden_dim)
      : prefix_(std::move(prefix)), input_dim_(input_dim), hidden_dim_(hidden_dim) {}

  void register_params(ParamStore& store, Rng& rng) const;

  // x: [n x input_dim], h: [n x hidden_dim] -> [n x hidden_dim].
  Var step(Tape& tape, Var x, Var h) const;

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  const std::string& prefix() const { return prefix_; }
  std::string name(const char* part) const { return prefix_ + "." + part; }

 private:
  std::string prefix_;
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
};

}  // namespace ibpm::nn
