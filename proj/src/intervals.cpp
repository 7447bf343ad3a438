// SPDX-License-Identifier: Apache-2.0
#include "ibpm/intervals.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ibpm/graph_io.hpp"

namespace ibpm {
namespace {

constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

// ControlFlow predecessors with self-loops removed.
std::vector<std::vector<NodeId>> flow_predecessors(const Graph& g) {
  std::vector<std::vector<NodeId>> preds(g.node_count());
  for (const Edge& e : g.edges()) {
    if (e.kind == EdgeKind::ControlFlow && !e.self_loop()) preds[e.dst].push_back(e.src);
  }
  return preds;
}

void require_rooted(const Graph& g) {
  if (!g.entry()) throw InvalidGraph("graph has no entry node");
  const auto reach = reachable_from_entry(g);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!reach[v]) {
      throw InvalidGraph("node " + std::to_string(g.label(v)) + " is unreachable from the entry");
    }
  }
}

}  // namespace

IntervalPartition partition(const Graph& g) {
  require_rooted(g);
  const auto preds = flow_predecessors(g);
  const std::size_t n = g.node_count();

  IntervalPartition result;
  result.node_to_interval.assign(n, kUnassigned);
  std::set<NodeId> headers{*g.entry()};

  while (!headers.empty()) {
    const NodeId h = *headers.begin();
    headers.erase(headers.begin());
    if (result.node_to_interval[h] != kUnassigned) continue;

    const std::size_t index = result.intervals.size();
    Interval iv{h, {h}};
    result.node_to_interval[h] = index;
    auto inside = [&](NodeId u) { return result.node_to_interval[u] == index; };

    // Absorb the smallest unassigned node whose predecessors all lie inside.
    for (bool grew = true; grew;) {
      grew = false;
      for (NodeId v = 0; v < n; ++v) {
        if (result.node_to_interval[v] != kUnassigned || preds[v].empty()) continue;
        if (std::all_of(preds[v].begin(), preds[v].end(), inside)) {
          iv.members.push_back(v);
          result.node_to_interval[v] = index;
          grew = true;
          break;
        }
      }
    }

    // Unassigned nodes entered both from this interval and from elsewhere
    // become headers of later intervals.
    for (NodeId v = 0; v < n; ++v) {
      if (result.node_to_interval[v] != kUnassigned) continue;
      const bool from_inside = std::any_of(preds[v].begin(), preds[v].end(), inside);
      const bool from_outside = !std::all_of(preds[v].begin(), preds[v].end(), inside);
      if (from_inside && from_outside) headers.insert(v);
    }
    result.intervals.push_back(std::move(iv));
  }

  for (NodeId v = 0; v < n; ++v) {
    if (result.node_to_interval[v] == kUnassigned) {
      throw InvalidGraph("node " + std::to_string(g.label(v)) + " was not assigned an interval");
    }
  }
  return result;
}

std::string to_string(IntervalViolation::Kind kind) {
  switch (kind) {
    case IntervalViolation::Kind::NotAMember:
      return "not-a-member";
    case IntervalViolation::Kind::HeaderMissing:
      return "header-missing";
    case IntervalViolation::Kind::ExternalEntry:
      return "external-entry";
    case IntervalViolation::Kind::CycleAvoidsHeader:
      return "cycle-avoids-header";
  }
  return "unknown";
}

std::vector<IntervalViolation> check_interval(const Graph& g, const Interval& iv) {
  using Kind = IntervalViolation::Kind;
  std::vector<IntervalViolation> out;
  std::vector<bool> member(g.node_count(), false);
  for (NodeId v : iv.members) {
    if (!g.contains(v)) {
      out.push_back({Kind::NotAMember, v});
      continue;
    }
    member[v] = true;
  }
  if (!out.empty()) return out;
  if (!g.contains(iv.header) || !member[iv.header]) {
    out.push_back({Kind::HeaderMissing, iv.header});
    return out;
  }

  std::set<NodeId> entered;
  for (const Edge& e : g.edges()) {
    if (e.kind != EdgeKind::ControlFlow) continue;
    if (!member[e.src] && member[e.dst] && e.dst != iv.header) entered.insert(e.dst);
  }
  for (NodeId v : entered) out.push_back({Kind::ExternalEntry, v});

  // Every closed path passes through the header iff the members minus the
  // header induce an acyclic ControlFlow subgraph.
  enum Color : char { White, Grey, Black };
  std::vector<Color> color(g.node_count(), White);
  std::set<NodeId> on_cycle;
  std::vector<NodeId> sorted = iv.members;
  std::sort(sorted.begin(), sorted.end());
  for (NodeId root : sorted) {
    if (root == iv.header || color[root] != White) continue;
    std::vector<std::pair<NodeId, std::vector<NodeId>>> stack;
    auto expand = [&](NodeId v) {
      std::vector<NodeId> next;
      for (NodeId w : g.successors(v, EdgeKind::ControlFlow)) {
        if (w != v && w != iv.header && member[w]) next.push_back(w);
      }
      std::reverse(next.begin(), next.end());
      color[v] = Grey;
      stack.emplace_back(v, std::move(next));
    };
    expand(root);
    while (!stack.empty()) {
      auto& [v, pending] = stack.back();
      if (pending.empty()) {
        color[v] = Black;
        stack.pop_back();
        continue;
      }
      const NodeId w = pending.back();
      pending.pop_back();
      if (color[w] == Grey) {
        on_cycle.insert(w);
      } else if (color[w] == White) {
        expand(w);
      }
    }
  }
  for (NodeId v : on_cycle) out.push_back({Kind::CycleAvoidsHeader, v});
  return out;
}

std::string to_string(Terminal t) {
  return t == Terminal::SingleNode ? "SingleNode" : "Irreducible";
}

bool DerivedSequence::deduplication_fired() const {
  return std::any_of(levels.begin(), levels.end(),
                     [](const DerivedLevel& l) { return l.deduplicated_edges > 0; });
}

Quotient quotient(const Graph& g, const IntervalPartition& p, std::uint64_t& next_label) {
  GraphBuilder builder;
  for (const Interval& iv : p.intervals) {
    if (iv.members.size() == 1) {
      builder.add_node(g.label(iv.members.front()));
    } else {
      builder.add_node(next_label++);
    }
  }
  Quotient q;
  for (const Edge& e : g.edges()) {
    const auto a = static_cast<NodeId>(p.node_to_interval[e.src]);
    const auto b = static_cast<NodeId>(p.node_to_interval[e.dst]);
    if (a == b) continue;
    const bool added = builder.add_edge(a, b, e.kind);
    if (!added && e.kind == EdgeKind::ControlFlow) ++q.deduplicated_edges;
  }
  if (g.entry()) builder.set_entry(static_cast<NodeId>(p.node_to_interval[*g.entry()]));
  q.graph = builder.build();
  return q;
}

DerivedSequence derive(const Graph& g) {
  DerivedSequence seq;
  seq.levels.push_back(DerivedLevel{g, partition(g), {}, 0});
  std::uint64_t next_label = 0;
  for (std::uint64_t label : g.labels()) next_label = std::max(next_label, label + 1);

  while (true) {
    const DerivedLevel& top = seq.levels.back();
    if (top.graph.node_count() <= 1) {
      seq.terminal = Terminal::SingleNode;
      break;
    }
    if (top.partition.intervals.size() == top.graph.node_count()) {
      seq.terminal = Terminal::Irreducible;
      break;
    }
    Quotient q = quotient(top.graph, top.partition, next_label);
    DerivedLevel next;
    next.partition = partition(q.graph);
    next.graph = std::move(q.graph);
    next.deduplicated_edges = q.deduplicated_edges;
    next.provenance.resize(next.graph.node_count());
    for (std::size_t i = 0; i < next.provenance.size(); ++i) next.provenance[i] = i;
    seq.levels.push_back(std::move(next));
  }
  return seq;
}

Graph interval_subgraph(const Graph& g, const Interval& iv) {
  return induced_subgraph(g, iv.members);
}

namespace {

nlohmann::ordered_json intervals_json(const Graph& g, const IntervalPartition& p) {
  auto intervals = nlohmann::ordered_json::array();
  for (const Interval& iv : p.intervals) {
    nlohmann::ordered_json item;
    item["header"] = g.label(iv.header);
    auto members = nlohmann::ordered_json::array();
    for (NodeId v : iv.members) members.push_back(g.label(v));
    item["members"] = std::move(members);
    intervals.push_back(std::move(item));
  }
  return intervals;
}

}  // namespace

nlohmann::ordered_json partition_to_json(const Graph& g, const IntervalPartition& p) {
  nlohmann::ordered_json doc;
  doc["intervals"] = intervals_json(g, p);
  return doc;
}

nlohmann::ordered_json sequence_to_json(const DerivedSequence& seq) {
  nlohmann::ordered_json doc;
  doc["terminal"] = to_string(seq.terminal);
  auto levels = nlohmann::ordered_json::array();
  for (const DerivedLevel& level : seq.levels) {
    nlohmann::ordered_json item;
    item["graph"] = graph_to_json(level.graph);
    item["intervals"] = intervals_json(level.graph, level.partition);
    item["provenance"] = level.provenance;
    item["deduplicated_edges"] = level.deduplicated_edges;
    levels.push_back(std::move(item));
  }
  doc["levels"] = std::move(levels);
  return doc;
}

DerivedSequence sequence_from_json(const nlohmann::json& doc) {
  try {
    DerivedSequence seq;
    const auto terminal = doc.at("terminal").get<std::string>();
    if (terminal == "SingleNode") {
      seq.terminal = Terminal::SingleNode;
    } else if (terminal == "Irreducible") {
      seq.terminal = Terminal::Irreducible;
    } else {
      throw FormatError("unknown terminal '" + terminal + "'");
    }
    for (const auto& item : doc.at("levels")) {
      DerivedLevel level;
      level.graph = graph_from_json(item.at("graph"));
      std::map<std::uint64_t, NodeId> index;
      for (NodeId v = 0; v < level.graph.node_count(); ++v) index[level.graph.label(v)] = v;
      auto lookup = [&](const nlohmann::json& label) {
        auto it = index.find(label.get<std::uint64_t>());
        if (it == index.end()) throw FormatError("interval references unknown node");
        return it->second;
      };
      level.partition.node_to_interval.assign(level.graph.node_count(), kUnassigned);
      for (const auto& iv_doc : item.at("intervals")) {
        Interval iv;
        iv.header = lookup(iv_doc.at("header"));
        for (const auto& m : iv_doc.at("members")) {
          const NodeId v = lookup(m);
          iv.members.push_back(v);
          level.partition.node_to_interval[v] = level.partition.intervals.size();
        }
        level.partition.intervals.push_back(std::move(iv));
      }
      if (item.contains("provenance")) {
        level.provenance = item.at("provenance").get<std::vector<std::size_t>>();
      }
      level.deduplicated_edges = item.value("deduplicated_edges", std::size_t{0});
      seq.levels.push_back(std::move(level));
    }
    return seq;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed derived sequence: ") + ex.what());
  }
}

}  // namespace ibpm
