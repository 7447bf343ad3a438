// SPDX-License-Identifier: Apache-2.0
//
// Directed multigraph with typed edges. Node ids are dense indices; every
// node also carries a stable external label (defaults to the index) which is
// what serialization and reports show.
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ibpm/error.hpp"

namespace ibpm {

using NodeId = std::uint32_t;

// Kinds 0..2 are built in; any larger value is an opaque extension tag.
enum class EdgeKind : std::uint8_t {
  ControlFlow = 0,
  DataDependency = 1,
  Call = 2,
};

inline constexpr std::size_t kBuiltinEdgeKinds = 3;

std::string to_string(EdgeKind kind);
EdgeKind edge_kind_from_string(const std::string& text);

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeKind kind = EdgeKind::ControlFlow;

  bool self_loop() const { return src == dst; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class DistanceMode { Directed, Symmetrized };

class Graph {
 public:
  Graph() = default;

  std::size_t node_count() const { return labels_.size(); }
  bool contains(NodeId v) const { return v < labels_.size(); }
  std::uint64_t label(NodeId v) const;
  const std::vector<std::uint64_t>& labels() const { return labels_; }

  // Sorted lexicographically by (src, dst, kind); no duplicates.
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count(EdgeKind kind) const;

  std::optional<NodeId> entry() const { return entry_; }

  // Both return ascending, duplicate-free node lists.
  std::vector<NodeId> predecessors(NodeId v, EdgeKind kind) const;
  std::vector<NodeId> successors(NodeId v, EdgeKind kind) const;

  // Incident edges of v, as (other endpoint, kind).
  std::span<const std::pair<NodeId, EdgeKind>> out_edges(NodeId v) const;
  std::span<const std::pair<NodeId, EdgeKind>> in_edges(NodeId v) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.labels_ == b.labels_ && a.edges_ == b.edges_ && a.entry_ == b.entry_;
  }

 private:
  friend class GraphBuilder;

  void check(NodeId v) const;

  std::vector<std::uint64_t> labels_;
  std::vector<Edge> edges_;
  std::optional<NodeId> entry_;
  std::vector<std::vector<std::pair<NodeId, EdgeKind>>> out_;
  std::vector<std::vector<std::pair<NodeId, EdgeKind>>> in_;
};

// Accumulates nodes and edges, then freezes them into an immutable Graph.
// Parallel edges of the same kind collapse into one.
class GraphBuilder {
 public:
  GraphBuilder() = default;
  // Creates nodes 0..n-1 labelled with their index.
  explicit GraphBuilder(std::size_t n);

  NodeId add_node();
  NodeId add_node(std::uint64_t label);
  // Returns false when an identical edge already exists.
  bool add_edge(NodeId src, NodeId dst, EdgeKind kind = EdgeKind::ControlFlow);
  void set_entry(NodeId v);

  std::size_t node_count() const { return labels_.size(); }

  Graph build() const;

 private:
  std::vector<std::uint64_t> labels_;
  std::set<std::uint64_t> used_labels_;
  std::set<Edge> edges_;
  std::optional<NodeId> entry_;
};

inline constexpr std::size_t kUnreachable = static_cast<std::size_t>(-1);

// Breadth-first distances from `source` over ControlFlow edges; kUnreachable
// marks nodes that cannot be reached.
std::vector<std::size_t> distances_from(const Graph& g, NodeId source, DistanceMode mode);

std::optional<std::size_t> distance(const Graph& g, NodeId u, NodeId v, DistanceMode mode);

class DiameterUndefined : public Error {
 public:
  DiameterUndefined(NodeId from, NodeId to);
  NodeId from;
  NodeId to;
};

// Longest shortest-path distance over all ordered pairs. Throws
// DiameterUndefined when some pair is disconnected under `mode`.
std::size_t diameter(const Graph& g, DistanceMode mode);

bool weakly_connected(const Graph& g, EdgeKind kind = EdgeKind::ControlFlow);

// Nodes reachable from the entry along ControlFlow edges, as a mask.
std::vector<bool> reachable_from_entry(const Graph& g);

// Subgraph induced by `members` (re-indexed in the given order, labels kept).
// The entry is set to members[0] when non-empty.
Graph induced_subgraph(const Graph& g, std::span<const NodeId> members);

}  // namespace ibpm
