// SPDX-License-Identifier: Apache-2.0
//
// Allen-style interval partitioning of a control-flow graph and the derived
// sequence of successively higher-order graphs. Only ControlFlow edges take
// part in partitioning; other edge kinds ride along on the quotient graphs.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "ibpm/graph.hpp"

namespace ibpm {

struct Interval {
  NodeId header = 0;
  // Header first, remaining members in the order they were absorbed.
  std::vector<NodeId> members;

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct IntervalPartition {
  std::vector<Interval> intervals;
  std::vector<std::size_t> node_to_interval;

  friend bool operator==(const IntervalPartition&, const IntervalPartition&) = default;
};

// Requires an entry node from which every node is reachable via ControlFlow
// edges; throws InvalidGraph naming the first offending node otherwise.
// Headers are taken from the worklist in ascending id order and candidate
// members are absorbed in ascending id order.
IntervalPartition partition(const Graph& g);

struct IntervalViolation {
  enum class Kind { NotAMember, HeaderMissing, ExternalEntry, CycleAvoidsHeader };
  Kind kind;
  NodeId node;

  friend bool operator==(const IntervalViolation&, const IntervalViolation&) = default;
};

std::string to_string(IntervalViolation::Kind kind);

// Checks the single-entry and closed-path properties of `iv` inside `g`.
std::vector<IntervalViolation> check_interval(const Graph& g, const Interval& iv);

enum class Terminal { SingleNode, Irreducible };

std::string to_string(Terminal t);

struct DerivedLevel {
  Graph graph;
  IntervalPartition partition;
  // provenance[v] is the interval of the previous level that node v of this
  // level replaces. Empty for the first level.
  std::vector<std::size_t> provenance;
  // ControlFlow edges of the previous level that collapsed onto an existing
  // quotient edge when this level was built.
  std::size_t deduplicated_edges = 0;

  friend bool operator==(const DerivedLevel&, const DerivedLevel&) = default;
};

struct DerivedSequence {
  std::vector<DerivedLevel> levels;
  Terminal terminal = Terminal::SingleNode;

  bool deduplication_fired() const;
  friend bool operator==(const DerivedSequence&, const DerivedSequence&) = default;
};

// Quotient of `g` by `p`: one node per interval (in interval order), one
// ControlFlow edge per ordered pair of distinct intervals joined by an exit
// edge, and the remaining edge kinds re-attached between quotient images.
// Singleton intervals keep their member's label; larger intervals receive
// `next_label` and the counter advances.
struct Quotient {
  Graph graph;
  std::size_t deduplicated_edges = 0;
};
Quotient quotient(const Graph& g, const IntervalPartition& p, std::uint64_t& next_label);

DerivedSequence derive(const Graph& g);

// Intervals of a level as induced subgraphs (all edge kinds kept).
Graph interval_subgraph(const Graph& g, const Interval& iv);

nlohmann::ordered_json partition_to_json(const Graph& g, const IntervalPartition& p);
nlohmann::ordered_json sequence_to_json(const DerivedSequence& seq);
DerivedSequence sequence_from_json(const nlohmann::json& doc);

}  // namespace ibpm
