// SPDX-License-Identifier: Apache-2.0
#include "ibpm/propagation.hpp"

#include <algorithm>
#include <numeric>

namespace ibpm {
namespace {

using Sets = std::vector<std::vector<bool>>;

// A group of nodes propagating among themselves until fixed point.
struct Unit {
  std::size_t interval = 0;
  std::vector<NodeId> nodes;
  std::vector<std::vector<std::size_t>> neighbours;  // local indices
  std::uint64_t edges = 0;
};

Unit make_unit(const Graph& g, std::span<const NodeId> nodes, std::size_t interval,
               DistanceMode mode) {
  Unit unit;
  unit.interval = interval;
  unit.nodes.assign(nodes.begin(), nodes.end());
  std::vector<std::size_t> local(g.node_count(), kUnreachable);
  for (std::size_t i = 0; i < unit.nodes.size(); ++i) local[unit.nodes[i]] = i;
  unit.neighbours.resize(unit.nodes.size());
  for (const Edge& e : g.edges()) {
    if (e.kind != EdgeKind::ControlFlow || e.self_loop()) continue;
    const std::size_t a = local[e.src];
    const std::size_t b = local[e.dst];
    if (a == kUnreachable || b == kUnreachable) continue;
    ++unit.edges;
    unit.neighbours[b].push_back(a);
    if (mode == DistanceMode::Symmetrized) unit.neighbours[a].push_back(b);
  }
  return unit;
}

bool unite(std::vector<bool>& into, const std::vector<bool>& from) {
  bool changed = false;
  for (std::size_t i = 0; i < into.size(); ++i) {
    if (from[i] && !into[i]) {
      into[i] = true;
      changed = true;
    }
  }
  return changed;
}

// Runs all units in lockstep; returns per-unit round counts.
std::vector<std::size_t> run_units(const std::vector<Unit>& units, Sets& sigma, Phase phase,
                                   std::size_t level, MessageLedger& ledger,
                                   std::vector<IbpmRun::PhaseActivity>* activity) {
  std::vector<std::size_t> rounds(units.size(), 0);
  std::vector<bool> settled(units.size(), false);
  while (true) {
    std::uint64_t round_messages = 0;
    bool any_changed = false;
    for (std::size_t k = 0; k < units.size(); ++k) {
      if (settled[k]) continue;
      const Unit& unit = units[k];
      Sets next(unit.nodes.size());
      bool changed = false;
      for (std::size_t i = 0; i < unit.nodes.size(); ++i) {
        next[i] = sigma[unit.nodes[i]];
        for (std::size_t j : unit.neighbours[i]) {
          changed |= unite(next[i], sigma[unit.nodes[j]]);
        }
      }
      if (!changed) {
        settled[k] = true;
        continue;
      }
      for (std::size_t i = 0; i < unit.nodes.size(); ++i) sigma[unit.nodes[i]] = std::move(next[i]);
      ++rounds[k];
      round_messages += unit.edges;
      any_changed = true;
    }
    if (!any_changed) break;
    ledger.per_round.push_back(round_messages);
    ledger.total += round_messages;
  }
  IbpmRun::PhaseActivity act{phase, level, {}};
  for (std::size_t k = 0; k < units.size(); ++k) {
    if (units[k].edges == 0) continue;
    ledger.breakdown.push_back(
        LedgerEntry{phase, level, units[k].interval, rounds[k], rounds[k] * units[k].edges});
    act.active.insert(act.active.end(), units[k].nodes.begin(), units[k].nodes.end());
  }
  if (activity) {
    std::sort(act.active.begin(), act.active.end());
    activity->push_back(std::move(act));
  }
  return rounds;
}

Sets singletons(std::size_t n) {
  Sets sigma(n, std::vector<bool>(n, false));
  for (std::size_t v = 0; v < n; ++v) sigma[v][v] = true;
  return sigma;
}

std::vector<Unit> interval_units(const DerivedLevel& level) {
  std::vector<Unit> units;
  for (std::size_t i = 0; i < level.partition.intervals.size(); ++i) {
    units.push_back(make_unit(level.graph, level.partition.intervals[i].members, i,
                              DistanceMode::Symmetrized));
  }
  return units;
}

std::vector<NodeId> all_nodes(const Graph& g) {
  std::vector<NodeId> nodes(g.node_count());
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  return nodes;
}

void validate(const DerivedSequence& seq) {
  if (seq.levels.empty()) throw InvalidSequence("derived sequence has no levels");
  for (std::size_t k = 1; k < seq.levels.size(); ++k) {
    const auto& level = seq.levels[k];
    const auto& below = seq.levels[k - 1];
    if (level.provenance.size() != level.graph.node_count() ||
        level.graph.node_count() != below.partition.intervals.size()) {
      throw InvalidSequence("provenance missing or incomplete at level " + std::to_string(k + 1));
    }
    std::vector<bool> seen(level.provenance.size(), false);
    for (std::size_t origin : level.provenance) {
      if (origin >= seen.size() || seen[origin]) {
        throw InvalidSequence("provenance is not a bijection at level " + std::to_string(k + 1));
      }
      seen[origin] = true;
    }
  }
  for (const auto& level : seq.levels) {
    if (level.partition.node_to_interval.size() != level.graph.node_count()) {
      throw InvalidSequence("partition does not cover its graph");
    }
  }
  const auto& top = seq.levels.back();
  if (seq.terminal == Terminal::SingleNode && top.graph.node_count() != 1) {
    throw InvalidSequence("SingleNode terminal but the top graph has " +
                          std::to_string(top.graph.node_count()) + " nodes");
  }
  if (seq.terminal == Terminal::Irreducible &&
      (top.graph.node_count() < 2 || top.partition.intervals.size() != top.graph.node_count())) {
    throw InvalidSequence("Irreducible terminal but the top level is reducible");
  }
}

}  // namespace

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Ascend:
      return "ascend";
    case Phase::Top:
      return "top";
    case Phase::Descend:
      return "descend";
  }
  return "unknown";
}

std::uint64_t message_edge_count(const Graph& g) {
  return static_cast<std::uint64_t>(std::count_if(g.edges().begin(), g.edges().end(), [](const Edge& e) {
    return e.kind == EdgeKind::ControlFlow && !e.self_loop();
  }));
}

StandardRun run_to_fixed_point(const Graph& g, DistanceMode mode) {
  if (!weakly_connected(g)) throw InvalidGraph("graph is not weakly connected");
  const std::size_t n = g.node_count();
  StandardRun run;
  run.sets.sigma = singletons(n);
  run.first_arrival.assign(n, std::vector<std::size_t>(n, kUnreachable));
  for (std::size_t v = 0; v < n; ++v) run.first_arrival[v][v] = 0;

  const auto nodes = all_nodes(g);
  const Unit unit = make_unit(g, nodes, 0, mode);
  // Round-by-round so that first arrivals can be recorded.
  while (true) {
    Sets next = run.sets.sigma;
    bool changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u : unit.neighbours[v]) changed |= unite(next[v], run.sets.sigma[u]);
    }
    if (!changed) break;
    ++run.rounds;
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u = 0; u < n; ++u) {
        if (next[v][u] && !run.sets.sigma[v][u]) run.first_arrival[v][u] = run.rounds;
      }
    }
    run.sets.sigma = std::move(next);
    run.ledger.per_round.push_back(unit.edges);
    run.ledger.total += unit.edges;
  }
  run.sets.round = run.rounds;
  if (unit.edges > 0) {
    run.ledger.breakdown.push_back(LedgerEntry{Phase::Top, 0, 0, run.rounds, run.ledger.total});
  }
  return run;
}

IbpmRun run_ibpm_to_fixed_point(const DerivedSequence& seq) {
  validate(seq);
  IbpmRun run;
  const std::size_t n = seq.levels.size();
  const bool irreducible = seq.terminal == Terminal::Irreducible;
  // Levels propagated interval-locally on the way up: all but the last.
  const std::size_t ascend_levels = n - 1;

  Sets sigma = singletons(seq.levels.front().graph.node_count());
  auto lift = [&](std::size_t k) {
    // Sets of level k are unions over the level k-1 intervals they replace.
    const auto& level = seq.levels[k];
    const auto& below = seq.levels[k - 1];
    Sets lifted(level.graph.node_count(), std::vector<bool>(sigma.front().size(), false));
    for (NodeId w = 0; w < level.graph.node_count(); ++w) {
      for (NodeId u : below.partition.intervals[level.provenance[w]].members) unite(lifted[w], sigma[u]);
    }
    sigma = std::move(lifted);
  };

  for (std::size_t k = 0; k < ascend_levels; ++k) {
    if (k > 0) lift(k);
    run_units(interval_units(seq.levels[k]), sigma, Phase::Ascend, k, run.ledger, &run.activity);
  }
  if (irreducible) {
    if (n > 1) lift(n - 1);
    const Graph& top = seq.levels[n - 1].graph;
    std::vector<Unit> units{make_unit(top, all_nodes(top), 0, DistanceMode::Symmetrized)};
    run_units(units, sigma, Phase::Top, n - 1, run.ledger, &run.activity);
  }
  // Descend from the level below the last one propagated.
  const std::size_t highest = irreducible ? n - 1 : (ascend_levels > 0 ? ascend_levels - 1 : 0);
  for (std::size_t k = highest; k-- > 0;) {
    sigma = singletons(seq.levels[k].graph.node_count());
    run_units(interval_units(seq.levels[k]), sigma, Phase::Descend, k, run.ledger, &run.activity);
  }
  return run;
}

std::uint64_t ibpm_closed_form(const DerivedSequence& seq) {
  validate(seq);
  const std::size_t n = seq.levels.size();
  auto interval_cost = [](const DerivedLevel& level) {
    std::uint64_t sum = 0;
    for (const Interval& iv : level.partition.intervals) {
      const Graph sub = interval_subgraph(level.graph, iv);
      sum += 2 * diameter(sub, DistanceMode::Symmetrized) * message_edge_count(sub);
    }
    return sum;
  };
  auto whole_cost = [](const Graph& g) {
    return diameter(g, DistanceMode::Symmetrized) * message_edge_count(g);
  };

  std::uint64_t total = 0;
  if (seq.terminal == Terminal::SingleNode) {
    if (n < 2) return 0;
    for (std::size_t j = 0; j + 2 < n; ++j) total += interval_cost(seq.levels[j]);
    total += whole_cost(seq.levels[n - 2].graph);
  } else {
    for (std::size_t j = 0; j + 1 < n; ++j) total += interval_cost(seq.levels[j]);
    total += whole_cost(seq.levels[n - 1].graph);
  }
  return total;
}

std::vector<std::size_t> interval_diameters(const DerivedSequence& seq) {
  std::vector<std::size_t> out;
  for (const auto& level : seq.levels) {
    for (const Interval& iv : level.partition.intervals) {
      out.push_back(diameter(interval_subgraph(level.graph, iv), DistanceMode::Symmetrized));
    }
  }
  return out;
}

IbpmBound ibpm_bound(const DerivedSequence& seq, std::uint64_t simulated_total) {
  validate(seq);
  IbpmBound result;
  for (std::size_t d : interval_diameters(seq)) result.tau = std::max(result.tau, d);
  if (seq.terminal == Terminal::Irreducible) {
    result.tau = std::max(result.tau, diameter(seq.levels.back().graph, DistanceMode::Symmetrized));
  }
  result.first_order_edges = message_edge_count(seq.levels.front().graph);
  result.bound = 2 * result.tau * result.first_order_edges;
  result.holds = simulated_total <= result.bound;
  return result;
}

IbpmBound ibpm_bound(const DerivedSequence& seq) {
  return ibpm_bound(seq, run_ibpm_to_fixed_point(seq).ledger.total);
}

nlohmann::ordered_json ledger_to_json(const MessageLedger& ledger) {
  nlohmann::ordered_json doc;
  doc["rounds"] = ledger.per_round.size();
  doc["total"] = ledger.total;
  doc["per_round"] = ledger.per_round;
  auto breakdown = nlohmann::ordered_json::array();
  for (const LedgerEntry& e : ledger.breakdown) {
    nlohmann::ordered_json item;
    item["phase"] = to_string(e.phase);
    item["level"] = e.level + 1;
    item["interval"] = e.interval;
    item["rounds"] = e.rounds;
    item["messages"] = e.messages;
    breakdown.push_back(std::move(item));
  }
  doc["breakdown"] = std::move(breakdown);
  return doc;
}

}  // namespace ibpm
