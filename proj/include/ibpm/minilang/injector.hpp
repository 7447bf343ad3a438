// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ibpm/minilang/ast.hpp"
#include "ibpm/minilang/interpreter.hpp"
#include "ibpm/rng.hpp"

namespace ibpm::minilang {

class NotInjectable : public Error {
 public:
  explicit NotInjectable(const std::string& message) : Error("not-injectable", message) {}
};

struct Injection {
  Program program;  // lines assigned
  int line = 0;     // the statement that faults
  BugKind kind = BugKind::Clean;
  std::vector<Input> trigger;  // inputs on which the mutant faults at `line`
};

// Strips one guard from `method`, or widens a `<` loop bound to `<=`:
//   NullDeref: `if (v != null) { ... }` without else is replaced by its body
//   IndexOob:  `if (e < len(a)) { ... }` likewise, or `while (e < b)` -> `<=`
//   BadCast:   `if (v instanceof C) { ... }` likewise
// Candidate sites are tried in random order. A site counts only when some
// sampled input makes the original run clean and the mutant fault with
// `kind` on a statement of `method`; that statement's line is reported.
// Throws NotInjectable when no site qualifies.
Injection inject_bug(const Program& program, const ClassTable& classes, const std::string& method, BugKind kind,
                     Rng& rng, std::size_t attempts_per_site = 64);

}  // namespace ibpm::minilang
