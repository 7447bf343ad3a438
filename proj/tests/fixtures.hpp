// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <initializer_list>
#include <map>
#include <utility>
#include <vector>

#include "ibpm/graph.hpp"
#include "ibpm/intervals.hpp"

namespace ibpm::testing {

// Builds a ControlFlow graph from labelled edges. Nodes are created in
// ascending label order, so dense ids follow the labels.
inline Graph labelled_graph(std::initializer_list<std::uint64_t> nodes,
                            std::initializer_list<std::pair<std::uint64_t, std::uint64_t>> edges,
                            std::uint64_t entry) {
  GraphBuilder b;
  std::map<std::uint64_t, NodeId> id;
  for (auto label : nodes) id[label] = 0;
  for (auto& [label, v] : id) v = b.add_node(label);
  for (auto [s, d] : edges) b.add_edge(id.at(s), id.at(d));
  b.set_entry(id.at(entry));
  return b.build();
}

// The seven-node loop nest used throughout: an outer loop 2..7 around an
// inner loop 3..6.
inline Graph loop_nest_graph() {
  return labelled_graph({1, 2, 3, 4, 5, 6, 7},
                        {{1, 2}, {2, 3}, {2, 7}, {3, 4}, {4, 5}, {5, 6}, {6, 3}, {6, 7}, {7, 2}},
                        1);
}

inline NodeId by_label(const Graph& g, std::uint64_t label) {
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (g.label(v) == label) return v;
  }
  throw InvalidArgument("no node labelled " + std::to_string(label));
}

// Floyd-Warshall over ControlFlow edges (self-loops ignored). Kept apart from
// the breadth-first search in the library so it can serve as an oracle.
inline std::vector<std::vector<std::size_t>> all_pairs(const Graph& g, DistanceMode mode) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, kUnreachable));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = 0;
  for (const Edge& e : g.edges()) {
    if (e.kind != EdgeKind::ControlFlow || e.self_loop()) continue;
    d[e.src][e.dst] = 1;
    if (mode == DistanceMode::Symmetrized) d[e.dst][e.src] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] != kUnreachable && d[k][j] != kUnreachable)
          d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

inline std::size_t brute_diameter(const Graph& g) {
  std::size_t best = 0;
  for (const auto& row : all_pairs(g, DistanceMode::Symmetrized))
    for (std::size_t d : row) best = std::max(best, d);
  return best;
}

inline std::uint64_t cf_edges(const Graph& g) {
  std::uint64_t n = 0;
  for (const Edge& e : g.edges()) n += e.kind == EdgeKind::ControlFlow && !e.self_loop();
  return n;
}

// Message count of the interval schedule, evaluated term by term with the
// Floyd-Warshall oracle rather than the library's breadth-first search.
inline std::uint64_t closed_form_oracle(const DerivedSequence& seq) {
  const std::size_t n = seq.levels.size();
  auto per_level = [](const DerivedLevel& level) {
    std::uint64_t sum = 0;
    for (const Interval& iv : level.partition.intervals) {
      const Graph sub = interval_subgraph(level.graph, iv);
      sum += 2 * brute_diameter(sub) * cf_edges(sub);
    }
    return sum;
  };
  std::uint64_t total = 0;
  if (seq.terminal == Terminal::SingleNode) {
    if (n < 2) return 0;
    for (std::size_t j = 0; j + 2 < n; ++j) total += per_level(seq.levels[j]);
    const Graph& g = seq.levels[n - 2].graph;
    return total + brute_diameter(g) * cf_edges(g);
  }
  for (std::size_t j = 0; j + 1 < n; ++j) total += per_level(seq.levels[j]);
  const Graph& g = seq.levels[n - 1].graph;
  return total + brute_diameter(g) * cf_edges(g);
}

}  // namespace ibpm::testing
