// SPDX-License-Identifier: Apache-2.0
//
// Random structured MiniLang programs for the synthetic corpus. Programs are
// built from guarded templates (null checks, bounds checks, instanceof
// checks) mixed with unguarded but safe look-alikes, so that a guard's
// absence alone does not give a bug away.
#pragma once

#include <string>

#include "ibpm/minilang/ast.hpp"
#include "ibpm/rng.hpp"

namespace ibpm::minilang {

struct GeneratorConfig {
  std::size_t min_templates = 3;
  std::size_t max_templates = 7;
  std::size_t max_helpers = 2;
  int max_nesting = 2;
};

struct GeneratedProgram {
  std::string source;  // canonical printed form
  Program program;     // parsed from `source`
  std::string target;  // the method the example is about
};

// The target is declared first; helpers only call helpers declared after
// them, so the call graph is acyclic. Int parameters are never assigned.
GeneratedProgram generate_program(Rng& rng, const GeneratorConfig& config = {});

}  // namespace ibpm::minilang
