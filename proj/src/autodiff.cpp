// SPDX-License-Identifier: Apache-2.0
#include "ibpm/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace ibpm::nn {

// ---- ParamStore ------------------------------------------------------------

void ParamStore::add(const std::string& name, Tensor value) {
  if (slots_.count(name)) throw InvalidArgument("parameter '" + name + "' already registered");
  Tensor zeros(value.shape());
  slots_.emplace(name, Slot{std::move(value), zeros, zeros});
}

void ParamStore::add_glorot(const std::string& name, std::size_t fan_in, std::size_t fan_out,
                            Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t = Tensor::matrix(fan_in, fan_out);
  for (double& x : t.data()) x = (2.0 * rng.uniform() - 1.0) * a;
  add(name, std::move(t));
}

void ParamStore::add_zeros(const std::string& name, std::vector<std::size_t> shape) {
  add(name, Tensor(std::move(shape)));
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return it->second.value;
}

void ParamStore::set(const std::string& name, Tensor value) {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  require_same_shape(it->second.value, value, "ParamStore::set");
  it->second.value = std::move(value);
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  for (const auto& [name, slot] : slots_) out.push_back(name);
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, slot] : slots_) n += slot.value.size();
  return n;
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.slots_.size() != b.slots_.size()) return false;
  for (const auto& [name, slot] : a.slots_) {
    auto it = b.slots_.find(name);
    if (it == b.slots_.end() || !(it->second.value == slot.value)) return false;
  }
  return true;
}

// ---- Tape ----------------------------------------------------------------

const Tensor& Var::value() const { return tape_->value(*this); }

Var Tape::constant(Tensor value) { return record(std::move(value), "constant", nullptr, false); }

Var Tape::param(const std::string& name) {
  if (!params_) throw InvalidArgument("tape has no parameter store");
  auto it = param_index_.find(name);
  if (it != param_index_.end()) return Var(this, it->second);
  Var v = record(params_->get(name), "param", nullptr, true);
  param_index_.emplace(name, v.index_);
  return v;
}

Var Tape::detach(Var v) { return constant(value(v)); }

Var Tape::record(Tensor value, const char* op, Backward backward, bool requires_grad) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  nodes_.push_back(Node{std::move(value), requires_grad ? std::move(backward) : nullptr, requires_grad});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(Var v) {
  if (grads_.size() < nodes_.size()) grads_.resize(nodes_.size());
  Tensor& g = grads_[v.index_];
  if (g.size() == 0 && nodes_[v.index_].value.size() != 0) g = Tensor(nodes_[v.index_].value.shape());
  return g;
}

Gradients Tape::backward(Var root) {
  if (value(root).size() != 1) {
    throw ShapeError("backward requires a scalar root, got " + value(root).shape_string());
  }
  grads_.assign(nodes_.size(), Tensor());
  grad(root)[0] = 1.0;
  for (std::size_t i = root.index_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || grads_[i].size() == 0) continue;
    const Tensor out_grad = grads_[i];
    node.backward(out_grad, *this);
  }
  Gradients result;
  if (params_) {
    for (const auto& [name, slot] : params_->slots()) {
      auto it = param_index_.find(name);
      if (it != param_index_.end() && grads_[it->second].size() != 0) {
        result.emplace(name, grads_[it->second]);
      } else {
        result.emplace(name, Tensor(slot.value.shape()));
      }
    }
  }
  return result;
}

// ---- ops -------------------------------------------------------------------

namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw InvalidArgument("operation on an empty Var");
  return *a.tape();
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.shape().size() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + t.shape_string());
}

// into += a * b^T
void add_matmul_nt(Tensor& into, const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows(), m = a.cols(), k = b.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < m; ++p) s += a(i, p) * b(j, p);
      into(i, j) += s;
    }
}

// into += a^T * b
void add_matmul_tn(Tensor& into, const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double x = a(i, p);
      if (x == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) into(p, j) += x * b(i, j);
    }
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a);
  Tensor c = ibpm::matmul(a.value(), b.value());
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.record(std::move(c), "matmul",
                     [a, b](const Tensor& g, Tape& t) {
                       if (t.requires_grad(a)) add_matmul_nt(t.grad(a), g, t.value(b));
                       if (t.requires_grad(b)) add_matmul_tn(t.grad(b), t.value(a), g);
                     },
                     rg);
}

Var add(Var a, Var b) {
  Tape& tape = tape_of(a);
  require_same_shape(a.value(), b.value(), "add");
  Tensor c = a.value();
  c += b.value();
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.record(std::move(c), "add",
                     [a, b](const Tensor& g, Tape& t) {
                       if (t.requires_grad(a)) t.grad(a) += g;
                       if (t.requires_grad(b)) t.grad(b) += g;
                     },
                     rg);
}

Var sub(Var a, Var b) {
  Tape& tape = tape_of(a);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor c = a.value();
  const Tensor& y = b.value();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= y[i];
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.record(std::move(c), "sub",
                     [a, b](const Tensor& g, Tape& t) {
                       if (t.requires_grad(a)) t.grad(a) += g;
                       if (t.requires_grad(b)) {
                         Tensor& gb = t.grad(b);
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                       }
                     },
                     rg);
}

Var mul(Var a, Var b) {
  Tape& tape = tape_of(a);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor c = a.value();
  const Tensor& y = b.value();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= y[i];
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.record(std::move(c), "mul",
                     [a, b](const Tensor& g, Tape& t) {
                       if (t.requires_grad(a)) {
                         Tensor& ga = t.grad(a);
                         const Tensor& yb = t.value(b);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * yb[i];
                       }
                       if (t.requires_grad(b)) {
                         Tensor& gb = t.grad(b);
                         const Tensor& ya = t.value(a);
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ya[i];
                       }
                     },
                     rg);
}

Var scale(Var a, double factor) {
  Tape& tape = tape_of(a);
  Tensor c = a.value();
  for (double& x : c.data()) x *= factor;
  return tape.record(std::move(c), "scale",
                     [a, factor](const Tensor& g, Tape& t) {
                       Tensor& ga = t.grad(a);
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
                     },
                     tape.requires_grad(a));
}

Var one_minus(Var a) {
  Tape& tape = tape_of(a);
  Tensor c = a.value();
  for (double& x : c.data()) x = 1.0 - x;
  return tape.record(std::move(c), "one_minus",
                     [a](const Tensor& g, Tape& t) {
                       Tensor& ga = t.grad(a);
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
                     },
                     tape.requires_grad(a));
}

Var add_row(Var a, Var bias) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  const Tensor& b = bias.value();
  require_rank2(x, "add_row");
  if (b.rows() != 1 || b.cols() != x.cols()) {
    throw ShapeError("add_row: shape mismatch " + x.shape_string() + " vs " + b.shape_string());
  }
  Tensor c = x;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) += b[j];
  const bool rg = tape.requires_grad(a) || tape.requires_grad(bias);
  return tape.record(std::move(c), "add_row",
                     [a, bias](const Tensor& g, Tape& t) {
                       if (t.requires_grad(a)) t.grad(a) += g;
                       if (t.requires_grad(bias)) {
                         Tensor& gb = t.grad(bias);
                         for (std::size_t i = 0; i < g.rows(); ++i)
                           for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
                       }
                     },
                     rg);
}

Var tanh(Var a) {
  Tape& tape = tape_of(a);
  Tensor y = a.value();
  for (double& x : y.data()) x = std::tanh(x);
  return tape.record(std::move(y), "tanh",
                     [a](const Tensor& g, Tape& t) {
                       Tensor& ga = t.grad(a);
                       const Tensor& x = t.value(a);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         const double th = std::tanh(x[i]);
                         ga[i] += g[i] * (1.0 - th * th);
                       }
                     },
                     tape.requires_grad(a));
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var sigmoid(Var a) {
  Tape& tape = tape_of(a);
  Tensor y = a.value();
  for (double& x : y.data()) x = stable_sigmoid(x);
  return tape.record(std::move(y), "sigmoid",
                     [a](const Tensor& g, Tape& t) {
                       Tensor& ga = t.grad(a);
                       const Tensor& x = t.value(a);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         const double s = stable_sigmoid(x[i]);
                         ga[i] += g[i] * s * (1.0 - s);
                       }
                     },
                     tape.requires_grad(a));
}

namespace {

// Softmax over groups of positions; `group_of(i)` maps a flat index to a
// group id in [0, groups).
template <typename GroupOf>
Tensor grouped_softmax(const Tensor& x, std::size_t groups, GroupOf group_of) {
  std::vector<double> max_value(groups, -INFINITY);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t k = group_of(i);
    max_value[k] = std::max(max_value[k], x[i]);
  }
  Tensor y(x.shape());
  std::vector<double> total(groups, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::exp(x[i] - max_value[group_of(i)]);
    total[group_of(i)] += y[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] /= total[group_of(i)];
  return y;
}

template <typename GroupOf>
void grouped_softmax_backward(const Tensor& y, const Tensor& g, Tensor& dx, std::size_t groups,
                              GroupOf group_of) {
  std::vector<double> dot(groups, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) dot[group_of(i)] += g[i] * y[i];
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] += y[i] * (g[i] - dot[group_of(i)]);
}

}  // namespace

Var softmax(Var a, int axis) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  require_rank2(x, "softmax");
  if (axis != 0 && axis != 1) throw InvalidArgument("softmax axis must be 0 or 1");
  const std::size_t cols = x.cols();
  const std::size_t groups = axis == 0 ? cols : x.rows();
  auto group_of = [axis, cols](std::size_t i) { return axis == 0 ? i % cols : i / cols; };
  Tensor y = grouped_softmax(x, groups, group_of);
  Tensor out = y;
  return tape.record(std::move(y), "softmax",
                     [a, out, groups, group_of](const Tensor& g, Tape& t) {
                       grouped_softmax_backward(out, g, t.grad(a), groups, group_of);
                     },
                     tape.requires_grad(a));
}

Var sum(Var a) {
  Tape& tape = tape_of(a);
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  return tape.record(Tensor::scalar(s), "sum",
                     [a](const Tensor& g, Tape& t) {
                       Tensor& ga = t.grad(a);
                       for (double& x : ga.data()) x += g[0];
                     },
                     tape.requires_grad(a));
}

Var mean_rows(Var a) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  require_rank2(x, "mean_rows");
  if (x.rows() == 0) throw ShapeError("mean_rows of an empty matrix");
  Tensor y = Tensor::matrix(1, x.cols());
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) y[j] += x(i, j) * inv;
  return tape.record(std::move(y), "mean_rows",
                     [a, inv](const Tensor& g, Tape& t) {
                       Tensor& ga = t.grad(a);
                       for (std::size_t i = 0; i < ga.rows(); ++i)
                         for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g[j] * inv;
                     },
                     tape.requires_grad(a));
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols of nothing");
  Tape& tape = tape_of(parts.front());
  const std::size_t rows = parts.front().value().rows();
  std::size_t cols = 0;
  bool rg = false;
  for (Var p : parts) {
    require_rank2(p.value(), "concat_cols");
    if (p.value().rows() != rows) {
      throw ShapeError("concat_cols: shape mismatch " + parts.front().value().shape_string() + " vs " +
                       p.value().shape_string());
    }
    cols += p.value().cols();
    rg = rg || tape.requires_grad(p);
  }
  Tensor y = Tensor::matrix(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& x = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) y(i, offset + j) = x(i, j);
    offset += x.cols();
  }
  std::vector<Var> owned(parts.begin(), parts.end());
  return tape.record(std::move(y), "concat_cols",
                     [owned](const Tensor& g, Tape& t) {
                       std::size_t off = 0;
                       for (Var p : owned) {
                         const std::size_t c = t.value(p).cols();
                         if (t.requires_grad(p)) {
                           Tensor& gp = t.grad(p);
                           for (std::size_t i = 0; i < gp.rows(); ++i)
                             for (std::size_t j = 0; j < c; ++j) gp(i, j) += g(i, off + j);
                         }
                         off += c;
                       }
                     },
                     rg);
}

Var gather_rows(Var a, std::span<const std::size_t> idx) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  require_rank2(x, "gather_rows");
  Tensor y = Tensor::matrix(idx.size(), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= x.rows()) throw ShapeError("gather_rows: row index out of range");
    for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) = x(idx[i], j);
  }
  std::vector<std::size_t> rows(idx.begin(), idx.end());
  return tape.record(std::move(y), "gather_rows",
                     [a, rows](const Tensor& g, Tape& t) {
                       Tensor& ga = t.grad(a);
                       for (std::size_t i = 0; i < rows.size(); ++i)
                         for (std::size_t j = 0; j < ga.cols(); ++j) ga(rows[i], j) += g(i, j);
                     },
                     tape.requires_grad(a));
}

Var segment_sum(Var a, std::span<const std::size_t> segment, std::size_t segments) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  require_rank2(x, "segment_sum");
  if (segment.size() != x.rows()) throw ShapeError("segment_sum: one segment id per row required");
  Tensor y = Tensor::matrix(segments, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (segment[i] >= segments) throw ShapeError("segment_sum: segment id out of range");
    for (std::size_t j = 0; j < x.cols(); ++j) y(segment[i], j) += x(i, j);
  }
  std::vector<std::size_t> seg(segment.begin(), segment.end());
  return tape.record(std::move(y), "segment_sum",
                     [a, seg](const Tensor& g, Tape& t) {
                       Tensor& ga = t.grad(a);
                       for (std::size_t i = 0; i < seg.size(); ++i)
                         for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(seg[i], j);
                     },
                     tape.requires_grad(a));
}

Var segment_softmax(Var a, std::span<const std::size_t> segment, std::size_t segments) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  require_rank2(x, "segment_softmax");
  if (segment.size() != x.rows()) throw ShapeError("segment_softmax: one segment id per row required");
  for (std::size_t s : segment) {
    if (s >= segments) throw ShapeError("segment_softmax: segment id out of range");
  }
  const std::size_t cols = x.cols();
  std::vector<std::size_t> seg(segment.begin(), segment.end());
  auto group_of = [seg, cols](std::size_t i) { return seg[i / cols] * cols + i % cols; };
  const std::size_t groups = segments * cols;
  Tensor y = grouped_softmax(x, groups, group_of);
  Tensor out = y;
  return tape.record(std::move(y), "segment_softmax",
                     [a, out, groups, group_of](const Tensor& g, Tape& t) {
                       grouped_softmax_backward(out, g, t.grad(a), groups, group_of);
                     },
                     tape.requires_grad(a));
}

Var neighbour_sum(Var a, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  require_rank2(x, "neighbour_sum");
  Tensor y(x.shape());
  const std::size_t cols = x.cols();
  for (const auto& [src, dst] : pairs) {
    if (src >= x.rows() || dst >= x.rows()) throw ShapeError("neighbour_sum: row index out of range");
    for (std::size_t j = 0; j < cols; ++j) y(dst, j) += x(src, j);
  }
  std::vector<std::pair<std::size_t, std::size_t>> owned(pairs.begin(), pairs.end());
  return tape.record(std::move(y), "neighbour_sum",
                     [a, owned](const Tensor& g, Tape& t) {
                       Tensor& ga = t.grad(a);
                       const std::size_t c = ga.cols();
                       for (const auto& [src, dst] : owned)
                         for (std::size_t j = 0; j < c; ++j) ga(src, j) += g(dst, j);
                     },
                     tape.requires_grad(a));
}

Var blend_rows(std::span<const double> mask, Var a, Var b) {
  Tape& tape = tape_of(a);
  require_same_shape(a.value(), b.value(), "blend_rows");
  const Tensor& x = a.value();
  const Tensor& z = b.value();
  if (mask.size() != x.rows()) throw ShapeError("blend_rows: one mask entry per row required");
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) = mask[i] * x(i, j) + (1.0 - mask[i]) * z(i, j);
  std::vector<double> m(mask.begin(), mask.end());
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.record(std::move(y), "blend_rows",
                     [a, b, m](const Tensor& g, Tape& t) {
                       const std::size_t c = g.cols();
                       if (t.requires_grad(a)) {
                         Tensor& ga = t.grad(a);
                         for (std::size_t i = 0; i < g.rows(); ++i)
                           for (std::size_t j = 0; j < c; ++j) ga(i, j) += m[i] * g(i, j);
                       }
                       if (t.requires_grad(b)) {
                         Tensor& gb = t.grad(b);
                         for (std::size_t i = 0; i < g.rows(); ++i)
                           for (std::size_t j = 0; j < c; ++j) gb(i, j) += (1.0 - m[i]) * g(i, j);
                       }
                     },
                     rg);
}

Var bce_with_logits(Var logits, std::span<const double> targets, std::span<const double> weights) {
  Tape& tape = tape_of(logits);
  const Tensor& x = logits.value();
  if (x.size() != targets.size() || x.size() != weights.size()) {
    throw ShapeError("bce_with_logits: " + std::to_string(x.size()) + " logits vs " +
                     std::to_string(targets.size()) + " targets");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    loss += weights[i] * (std::max(v, 0.0) - v * targets[i] + std::log1p(std::exp(-std::abs(v))));
  }
  std::vector<double> y(targets.begin(), targets.end());
  std::vector<double> w(weights.begin(), weights.end());
  return tape.record(Tensor::scalar(loss), "bce_with_logits",
                     [logits, y, w](const Tensor& g, Tape& t) {
                       Tensor& gl = t.grad(logits);
                       const Tensor& v = t.value(logits);
                       for (std::size_t i = 0; i < v.size(); ++i)
                         gl[i] += g[0] * w[i] * (stable_sigmoid(v[i]) - y[i]);
                     },
                     tape.requires_grad(logits));
}

}  // namespace ibpm::nn
