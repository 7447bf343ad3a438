// SPDX-License-Identifier: Apache-2.0
#include "ibpm/graph.hpp"

#include <algorithm>
#include <deque>

namespace ibpm {

std::string to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::ControlFlow:
      return "ControlFlow";
    case EdgeKind::DataDependency:
      return "DataDependency";
    case EdgeKind::Call:
      return "Call";
  }
  return "ext:" + std::to_string(static_cast<unsigned>(kind));
}

EdgeKind edge_kind_from_string(const std::string& text) {
  if (text == "ControlFlow") return EdgeKind::ControlFlow;
  if (text == "DataDependency") return EdgeKind::DataDependency;
  if (text == "Call") return EdgeKind::Call;
  if (text.rfind("ext:", 0) == 0) {
    int tag = -1;
    try {
      tag = std::stoi(text.substr(4));
    } catch (const std::exception&) {
    }
    if (tag >= static_cast<int>(kBuiltinEdgeKinds) && tag <= 255) {
      return static_cast<EdgeKind>(tag);
    }
  }
  throw InvalidArgument("unknown edge kind '" + text + "'");
}

void Graph::check(NodeId v) const {
  if (!contains(v)) {
    throw InvalidArgument("unknown node " + std::to_string(v));
  }
}

std::uint64_t Graph::label(NodeId v) const {
  check(v);
  return labels_[v];
}

std::size_t Graph::edge_count(EdgeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [&](const Edge& e) { return e.kind == kind; }));
}

std::vector<NodeId> Graph::predecessors(NodeId v, EdgeKind kind) const {
  check(v);
  std::vector<NodeId> out;
  for (const auto& [u, k] : in_[v]) {
    if (k == kind) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> Graph::successors(NodeId v, EdgeKind kind) const {
  check(v);
  std::vector<NodeId> out;
  for (const auto& [u, k] : out_[v]) {
    if (k == kind) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::span<const std::pair<NodeId, EdgeKind>> Graph::out_edges(NodeId v) const {
  check(v);
  return out_[v];
}

std::span<const std::pair<NodeId, EdgeKind>> Graph::in_edges(NodeId v) const {
  check(v);
  return in_[v];
}

GraphBuilder::GraphBuilder(std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) add_node();
}

NodeId GraphBuilder::add_node() {
  std::uint64_t label = labels_.size();
  while (used_labels_.count(label)) ++label;
  return add_node(label);
}

NodeId GraphBuilder::add_node(std::uint64_t label) {
  if (!used_labels_.insert(label).second) {
    throw InvalidArgument("duplicate node label " + std::to_string(label));
  }
  labels_.push_back(label);
  return static_cast<NodeId>(labels_.size() - 1);
}

bool GraphBuilder::add_edge(NodeId src, NodeId dst, EdgeKind kind) {
  if (src >= labels_.size() || dst >= labels_.size()) {
    throw InvalidArgument("edge endpoint out of range: " + std::to_string(src) + " -> " +
                          std::to_string(dst));
  }
  return edges_.insert(Edge{src, dst, kind}).second;
}

void GraphBuilder::set_entry(NodeId v) {
  if (v >= labels_.size()) {
    throw InvalidArgument("entry node " + std::to_string(v) + " does not exist");
  }
  entry_ = v;
}

Graph GraphBuilder::build() const {
  Graph g;
  g.labels_ = labels_;
  g.edges_.assign(edges_.begin(), edges_.end());
  g.entry_ = entry_;
  g.out_.resize(labels_.size());
  g.in_.resize(labels_.size());
  for (const Edge& e : g.edges_) {
    g.out_[e.src].emplace_back(e.dst, e.kind);
    g.in_[e.dst].emplace_back(e.src, e.kind);
  }
  return g;
}

std::vector<std::size_t> distances_from(const Graph& g, NodeId source, DistanceMode mode) {
  if (!g.contains(source)) {
    throw InvalidArgument("unknown node " + std::to_string(source));
  }
  std::vector<std::size_t> dist(g.node_count(), kUnreachable);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  auto visit = [&](NodeId from, NodeId to) {
    if (dist[to] == kUnreachable) {
      dist[to] = dist[from] + 1;
      queue.push_back(to);
    }
  };
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (const auto& [w, kind] : g.out_edges(u)) {
      if (kind == EdgeKind::ControlFlow) visit(u, w);
    }
    if (mode == DistanceMode::Symmetrized) {
      for (const auto& [w, kind] : g.in_edges(u)) {
        if (kind == EdgeKind::ControlFlow) visit(u, w);
      }
    }
  }
  return dist;
}

std::optional<std::size_t> distance(const Graph& g, NodeId u, NodeId v, DistanceMode mode) {
  if (!g.contains(v)) {
    throw InvalidArgument("unknown node " + std::to_string(v));
  }
  const std::size_t d = distances_from(g, u, mode)[v];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

DiameterUndefined::DiameterUndefined(NodeId from_node, NodeId to_node)
    : Error("diameter-undefined", "no path from node " + std::to_string(from_node) + " to node " +
                                      std::to_string(to_node)),
      from(from_node),
      to(to_node) {}

std::size_t diameter(const Graph& g, DistanceMode mode) {
  std::size_t best = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto dist = distances_from(g, u, mode);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      if (dist[v] == kUnreachable) throw DiameterUndefined(u, v);
      best = std::max(best, dist[v]);
    }
  }
  return best;
}

bool weakly_connected(const Graph& g, EdgeKind kind) {
  if (g.node_count() == 0) return true;
  std::vector<bool> seen(g.node_count(), false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    auto push = [&](NodeId w, EdgeKind k) {
      if (k == kind && !seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
    };
    for (const auto& [w, k] : g.out_edges(u)) push(w, k);
    for (const auto& [w, k] : g.in_edges(u)) push(w, k);
  }
  return count == g.node_count();
}

std::vector<bool> reachable_from_entry(const Graph& g) {
  std::vector<bool> seen(g.node_count(), false);
  if (!g.entry()) return seen;
  const auto dist = distances_from(g, *g.entry(), DistanceMode::Directed);
  for (NodeId v = 0; v < g.node_count(); ++v) seen[v] = dist[v] != kUnreachable;
  return seen;
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> members) {
  std::vector<NodeId> index(g.node_count(), static_cast<NodeId>(-1));
  GraphBuilder builder;
  for (NodeId v : members) {
    index[v] = builder.add_node(g.label(v));
  }
  for (const Edge& e : g.edges()) {
    if (index[e.src] != static_cast<NodeId>(-1) && index[e.dst] != static_cast<NodeId>(-1)) {
      builder.add_edge(index[e.src], index[e.dst], e.kind);
    }
  }
  if (!members.empty()) builder.set_entry(0);
  return builder.build();
}

}  // namespace ibpm
