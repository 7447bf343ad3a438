// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode automatic differentiation over rank-2 tensors. A Tape records
// every op applied during a forward pass; backward() walks it in reverse.
// One tape per thread; tapes share a ParamStore read-only.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ibpm/rng.hpp"
#include "ibpm/tensor.hpp"

namespace ibpm::nn {

using Gradients = std::map<std::string, Tensor>;

// Named trainable tensors plus the optimizer's moment estimates.
class ParamStore {
 public:
  struct Slot {
    Tensor value;
    Tensor first_moment;
    Tensor second_moment;
  };

  // Registers a new parameter; names are unique and shapes fixed thereafter.
  void add(const std::string& name, Tensor value);
  // Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
  void add_glorot(const std::string& name, std::size_t fan_in, std::size_t fan_out, Rng& rng);
  void add_zeros(const std::string& name, std::vector<std::size_t> shape);

  bool contains(const std::string& name) const { return slots_.count(name) > 0; }
  const Tensor& get(const std::string& name) const;
  // Replaces the value; the shape must not change.
  void set(const std::string& name, Tensor value);

  std::vector<std::string> names() const;
  std::size_t size() const { return slots_.size(); }
  std::size_t scalar_count() const;

  std::map<std::string, Slot>& slots() { return slots_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }
  std::uint64_t& step() { return step_; }

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::map<std::string, Slot> slots_;
  std::uint64_t step_ = 0;
};

class Tape;

class Var {
 public:
  Var() = default;
  // The reference is invalidated by the next op recorded on the same tape.
  const Tensor& value() const;
  std::size_t index() const { return index_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  // Receives the gradient of the op's output and accumulates into parents.
  using Backward = std::function<void(const Tensor& out_grad, Tape& tape)>;

  explicit Tape(const ParamStore* params = nullptr) : params_(params) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a parameter of the store; repeated lookups share one leaf.
  Var param(const std::string& name);
  // Copy of v's value cut off from the graph (receives no gradient).
  Var detach(Var v);

  const Tensor& value(Var v) const { return nodes_[v.index_].value; }
  bool requires_grad(Var v) const { return nodes_[v.index_].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse pass from a 1x1 root. Every parameter of the store gets an entry;
  // parameters the root does not depend on get zeros.
  Gradients backward(Var root);

  // Op plumbing.
  Var record(Tensor value, const char* op, Backward backward, bool requires_grad);
  Tensor& grad(Var v);

 private:
  struct Node {
    Tensor value;
    Backward backward;
    bool requires_grad = false;
  };

  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::map<std::string, std::size_t> param_index_;
};

// ---- ops -----------------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var one_minus(Var a);
// a [n x m] + bias [1 x m] broadcast over rows.
Var add_row(Var a, Var bias);
Var tanh(Var a);
Var sigmoid(Var a);
// axis 0: normalise each column across rows; axis 1: each row across columns.
// Uses max-subtraction.
Var softmax(Var a, int axis);
Var sum(Var a);
// [n x m] -> [1 x m].
Var mean_rows(Var a);
Var concat_cols(std::span<const Var> parts);
// Rows a[idx[0]], a[idx[1]], ...
Var gather_rows(Var a, std::span<const std::size_t> idx);
// out[segment[i]] += a[i]; out has `segments` rows.
Var segment_sum(Var a, std::span<const std::size_t> segment, std::size_t segments);
// Softmax across the rows sharing a segment id, separately per column.
Var segment_softmax(Var a, std::span<const std::size_t> segment, std::size_t segments);
// out[dst] += a[src] for each (src, dst) pair.
Var neighbour_sum(Var a, std::span<const std::pair<std::size_t, std::size_t>> pairs);
// out[i] = mask[i] * a[i] + (1 - mask[i]) * b[i] row-wise.
Var blend_rows(std::span<const double> mask, Var a, Var b);
// Weighted binary cross-entropy on logits [n x 1]; returns the weighted sum.
Var bce_with_logits(Var logits, std::span<const double> targets, std::span<const double> weights);

}  // namespace ibpm::nn
