// SPDX-License-Identifier: Apache-2.0
#include "ibpm/graph_gen.hpp"

#include <vector>

#include "ibpm/intervals.hpp"

namespace ibpm {

Graph random_weakly_connected(Rng& rng, std::size_t max_nodes) {
  const auto n = static_cast<std::size_t>(rng.range(1, static_cast<std::int64_t>(max_nodes)));
  GraphBuilder builder(n);
  for (NodeId v = 1; v < n; ++v) {
    const auto u = static_cast<NodeId>(rng.below(v));
    if (rng.chance(0.5)) {
      builder.add_edge(u, v);
    } else {
      builder.add_edge(v, u);
    }
  }
  const std::size_t extra = n > 1 ? rng.below(2 * n) : 0;
  for (std::size_t i = 0; i < extra; ++i) {
    const auto a = static_cast<NodeId>(rng.below(n));
    const auto b = static_cast<NodeId>(rng.below(n));
    if (a != b) builder.add_edge(a, b);
  }
  builder.set_entry(0);
  return builder.build();
}

namespace {

struct Fragment {
  NodeId entry;
  std::vector<NodeId> exits;
};

struct LoopInfo {
  NodeId header;
  std::vector<NodeId> body;
};

class StructuredBuilder {
 public:
  StructuredBuilder(Rng& rng, std::size_t budget) : rng_(rng), budget_(budget) {}

  Fragment sequence(int depth) {
    Fragment first = construct(depth);
    Fragment current = first;
    const std::size_t length = 1 + rng_.below(4);
    for (std::size_t i = 1; i < length && remaining() > 0; ++i) {
      Fragment next = construct(depth);
      for (NodeId x : current.exits) builder.add_edge(x, next.entry);
      current.exits = next.exits;
    }
    return {first.entry, current.exits};
  }

  GraphBuilder builder;
  std::vector<LoopInfo> loops;

  std::size_t remaining() const {
    return builder.node_count() >= budget_ ? 0 : budget_ - builder.node_count();
  }

 private:
  Fragment construct(int depth) {
    const std::uint64_t roll = rng_.below(10);
    if (depth < 4 && remaining() >= 3 && roll < 3) return if_else(depth);
    if (depth < 4 && remaining() >= 2 && roll < 6) return loop(depth);
    const NodeId v = builder.add_node();
    return {v, {v}};
  }

  Fragment if_else(int depth) {
    const NodeId cond = builder.add_node();
    Fragment then_part = sequence(depth + 1);
    builder.add_edge(cond, then_part.entry);
    Fragment out{cond, then_part.exits};
    if (remaining() > 0 && rng_.chance(0.5)) {
      Fragment else_part = sequence(depth + 1);
      builder.add_edge(cond, else_part.entry);
      out.exits.insert(out.exits.end(), else_part.exits.begin(), else_part.exits.end());
    } else {
      out.exits.push_back(cond);
    }
    return out;
  }

  Fragment loop(int depth) {
    const NodeId header = builder.add_node();
    const NodeId first_body = static_cast<NodeId>(builder.node_count());
    Fragment body = sequence(depth + 1);
    builder.add_edge(header, body.entry);
    for (NodeId x : body.exits) builder.add_edge(x, header);
    LoopInfo info{header, {}};
    for (NodeId v = first_body; v < builder.node_count(); ++v) info.body.push_back(v);
    loops.push_back(std::move(info));
    return {header, {header}};
  }

  Rng& rng_;
  std::size_t budget_;
};

}  // namespace

Graph random_structured_cfg(Rng& rng, std::size_t min_nodes, std::size_t max_nodes) {
  while (true) {
  const auto target = static_cast<std::size_t>(
      rng.range(static_cast<std::int64_t>(min_nodes), static_cast<std::int64_t>(max_nodes)));
  StructuredBuilder sb(rng, target);
  const NodeId entry = sb.builder.add_node();
  std::vector<NodeId> exits{entry};
  while (sb.builder.node_count() < min_nodes || sb.remaining() > 0) {
    Fragment next = sb.sequence(0);
    for (NodeId x : exits) sb.builder.add_edge(x, next.entry);
    exits = next.exits;
    if (sb.builder.node_count() >= min_nodes && sb.remaining() == 0) break;
  }
  if (sb.builder.node_count() > max_nodes) continue;
  sb.builder.set_entry(entry);
  return sb.builder.build();
  }
}

Graph random_irreducible_cfg(Rng& rng, std::size_t min_nodes, std::size_t max_nodes) {
  while (true) {
    const auto target = static_cast<std::size_t>(
        rng.range(static_cast<std::int64_t>(min_nodes), static_cast<std::int64_t>(max_nodes)));
    StructuredBuilder sb(rng, target);
    const NodeId entry = sb.builder.add_node();
    std::vector<NodeId> exits{entry};
    while (sb.builder.node_count() < min_nodes || sb.remaining() > 0) {
      Fragment next = sb.sequence(0);
      for (NodeId x : exits) sb.builder.add_edge(x, next.entry);
      exits = next.exits;
      if (sb.builder.node_count() >= min_nodes && sb.remaining() == 0) break;
    }
    if (sb.loops.empty() || sb.builder.node_count() > max_nodes) continue;
    const LoopInfo& loop = sb.loops[rng.below(sb.loops.size())];
    if (loop.body.empty()) continue;
    // Any node created before the loop header lies outside the loop.
    const auto source = static_cast<NodeId>(rng.below(loop.header + 1));
    const NodeId target_node = loop.body[rng.below(loop.body.size())];
    if (source == loop.header) continue;
    sb.builder.add_edge(source, target_node);
    sb.builder.set_entry(entry);
    Graph g = sb.builder.build();
    if (derive(g).terminal == Terminal::Irreducible) return g;
  }
}

}  // namespace ibpm
