// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ibpm/minilang/ast.hpp"
#include "ibpm/rng.hpp"

namespace ibpm::minilang {

// One argument value. Objects get their fields (own and inherited, in
// declaration order) from `data`, padded with zeros.
struct Input {
  enum class Kind { Int, Null, Object, Array };
  Kind kind = Kind::Int;
  std::int64_t value = 0;
  std::string cls;
  std::vector<std::int64_t> data;

  static Input integer(std::int64_t v) { return {Kind::Int, v, {}, {}}; }
  static Input null() { return {Kind::Null, 0, {}, {}}; }
  static Input object(std::string cls, std::vector<std::int64_t> fields = {}) {
    return {Kind::Object, 0, std::move(cls), std::move(fields)};
  }
  static Input array(std::vector<std::int64_t> data) { return {Kind::Array, 0, {}, std::move(data)}; }
  friend bool operator==(const Input&, const Input&) = default;
};

std::string to_string(const Input& in);

struct Outcome {
  enum class Status { Ok, Fault, Timeout };
  Status status = Status::Ok;
  BugKind fault = BugKind::Clean;  // Fault only
  int line = 0;                    // Fault only
  std::int64_t result = 0;         // Ok with an int result

  bool ok() const { return status == Status::Ok; }
  bool faulted(BugKind kind) const { return status == Status::Fault && fault == kind; }
};

std::string to_string(const Outcome& o);

inline constexpr std::size_t kDefaultStepBudget = 100000;

// Runs `method` on `inputs`. Integer arithmetic wraps. Faults: field or
// index access through null and len(null) are NullDeref; indices outside
// the array and negative array sizes are IndexOob; casting an object to a
// class it does not extend is BadCast (casting null succeeds). Every
// executed statement costs one step; running out of steps, or nesting calls
// deeper than 256 frames, is a Timeout.
Outcome interpret(const Program& program, const ClassTable& classes, const std::string& method,
                  const std::vector<Input>& inputs, std::size_t step_budget = kDefaultStepBudget);

// Random arguments for `method`: ints in [0, 7], non-null arrays of length
// 0..6 with entries in [0, 9], and references that are null 30% of the time
// and otherwise an instance of the declared class or one of its subclasses.
std::vector<Input> sample_inputs(const Method& method, const ClassTable& classes, Rng& rng);

}  // namespace ibpm::minilang
