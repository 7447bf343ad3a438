// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ibpm/minilang/ast.hpp"

namespace ibpm::minilang {

// Canonical layout: one statement per line, two-space indentation, `}` and
// `} else {` on lines of their own. Parsing the output reproduces the AST.
std::string print(const Program& p);
std::string print(const Expr& e);
// The statement's own line: `x = a[i];`, or `if (c) {` / `while (c) {`.
std::string print_header(const Stmt& s);
std::string print_signature(const Method& m);

// Sets every line field to the line the statement occupies in print(p).
void assign_lines(Program& p);

}  // namespace ibpm::minilang
