// SPDX-License-Identifier: Apache-2.0
//
// Two-step top-k scoring: a method is flagged when its score exceeds the
// threshold, and only flagged methods contribute statement predictions.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ibpm/minilang/ast.hpp"

namespace ibpm {

struct Scored {
  double method = 0.0;
  std::vector<double> statements;
  bool buggy = false;
  std::vector<int> labels;  // aligned with statements
  minilang::BugKind kind = minilang::BugKind::Clean;
};

struct Prf {
  std::size_t tp = 0;
  std::size_t predicted = 0;
  std::size_t actual = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision and recall are 0 when their denominators are; F1 is 0 when
// P + R is.
Prf make_prf(std::size_t tp, std::size_t predicted, std::size_t actual);

Prf method_prf(std::span<const Scored> items, double threshold);
// Same counts for a detector that flags every method.
Prf always_buggy_prf(std::span<const Scored> items);
// Flagged methods predict their k best statements; a prediction is a true
// positive when that statement is labelled faulty.
Prf statement_prf(std::span<const Scored> items, std::size_t k, double threshold);

struct HitRate {
  std::size_t hits = 0;
  std::size_t methods = 0;  // correctly flagged buggy methods
  double rate = 0.0;
};

// Among correctly flagged buggy methods, how often a faulty statement is
// among the k best.
HitRate top_k_hit_rate(std::span<const Scored> items, std::size_t k, double threshold);

}  // namespace ibpm
