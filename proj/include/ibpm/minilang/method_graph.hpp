// SPDX-License-Identifier: Apache-2.0
//
// Statement-level graphs for MiniLang methods. Node 0 is the method entry
// (its signature); every simple statement and every if/while condition gets
// a node of its own.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ibpm/graph.hpp"
#include "ibpm/minilang/ast.hpp"

namespace ibpm::minilang {

struct MethodGraph {
  std::string method;  // the target method
  Graph graph;
  std::vector<std::vector<std::string>> tokens;
  std::vector<int> lines;            // source line; the signature line for entries
  std::vector<std::string> owner;    // method each node was built from
  std::vector<std::vector<std::string>> calls;  // callees invoked at the node
  std::vector<NodeId> rankable;      // statements of the target method
  std::vector<int> labels;           // 1 marks the faulty statement
  BugKind kind = BugKind::Clean;
  // Calls left out of inlining because the callee can reach the caller.
  std::vector<std::string> skipped_calls;

  bool buggy() const { return kind != BugKind::Clean; }
  // Node of the target method occupying `line`, if any.
  std::optional<NodeId> node_at_line(int line) const;
};

// Builds the graph of `method` in `program`. Lines come from the statements,
// so run assign_lines first when the AST was not parsed from printed text.
MethodGraph build_cfg(const Program& program, const ClassTable& classes, const std::string& method);

// Marks the node at `line` as the faulty statement. Throws InvalidArgument
// when no target statement sits on that line.
void label_fault(MethodGraph& mg, int line, BugKind kind);

// Stitches callees into the graph: depth 1 adds every method the target
// calls, depth 2 also the methods those call. Each callee appears once; every
// call site gets Call and ControlFlow edges to the callee's entry.
MethodGraph inline_calls(const MethodGraph& mg, const Program& program, const ClassTable& classes, int depth);

nlohmann::ordered_json method_graph_to_json(const MethodGraph& mg);

}  // namespace ibpm::minilang
