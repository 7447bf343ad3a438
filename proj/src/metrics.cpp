// SPDX-License-Identifier: Apache-2.0
#include "ibpm/metrics.hpp"

#include "ibpm/model.hpp"

namespace ibpm {

Prf make_prf(std::size_t tp, std::size_t predicted, std::size_t actual) {
  Prf r{tp, predicted, actual, 0.0, 0.0, 0.0};
  if (predicted > 0) r.precision = static_cast<double>(tp) / static_cast<double>(predicted);
  if (actual > 0) r.recall = static_cast<double>(tp) / static_cast<double>(actual);
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

Prf method_prf(std::span<const Scored> items, double threshold) {
  std::size_t tp = 0, predicted = 0, actual = 0;
  for (const Scored& s : items) {
    const bool flagged = s.method > threshold;
    predicted += flagged;
    actual += s.buggy;
    tp += flagged && s.buggy;
  }
  return make_prf(tp, predicted, actual);
}

Prf always_buggy_prf(std::span<const Scored> items) {
  std::size_t actual = 0;
  for (const Scored& s : items) actual += s.buggy;
  return make_prf(actual, items.size(), actual);
}

Prf statement_prf(std::span<const Scored> items, std::size_t k, double threshold) {
  std::size_t tp = 0, predicted = 0, actual = 0;
  for (const Scored& s : items) {
    if (s.labels.size() != s.statements.size()) throw InvalidArgument("labels and scores differ in length");
    for (int l : s.labels) actual += l != 0;
    if (!(s.method > threshold)) continue;
    for (std::size_t idx : top_n(s.statements, k)) {
      ++predicted;
      tp += s.labels[idx] != 0;
    }
  }
  return make_prf(tp, predicted, actual);
}

HitRate top_k_hit_rate(std::span<const Scored> items, std::size_t k, double threshold) {
  HitRate h;
  for (const Scored& s : items) {
    if (!s.buggy || !(s.method > threshold)) continue;
    ++h.methods;
    for (std::size_t idx : top_n(s.statements, k)) {
      if (s.labels[idx] != 0) {
        ++h.hits;
        break;
      }
    }
  }
  if (h.methods > 0) h.rate = static_cast<double>(h.hits) / static_cast<double>(h.methods);
  return h;
}

}  // namespace ibpm
