// SPDX-License-Identifier: Apache-2.0
//
// Exact set-based simulation of synchronous message passing, both over a
// whole graph and under the interval-based schedule on a derived sequence.
// Each node v carries a reach set sigma_v, initially {v}; one round replaces
// sigma_v with sigma_v united with sigma_u for every neighbour u. A round
// costs one message per ControlFlow edge (self-loops excluded).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ibpm/graph.hpp"
#include "ibpm/intervals.hpp"

namespace ibpm {

struct ReachSets {
  std::vector<std::vector<bool>> sigma;
  std::size_t round = 0;
};

enum class Phase { Ascend, Top, Descend };

std::string to_string(Phase phase);

struct LedgerEntry {
  Phase phase = Phase::Ascend;
  std::size_t level = 0;     // 0-based index into DerivedSequence::levels
  std::size_t interval = 0;  // interval index at that level (0 for Top)
  std::size_t rounds = 0;
  std::uint64_t messages = 0;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct MessageLedger {
  std::vector<std::uint64_t> per_round;
  std::uint64_t total = 0;
  std::vector<LedgerEntry> breakdown;

  friend bool operator==(const MessageLedger&, const MessageLedger&) = default;
};

struct StandardRun {
  ReachSets sets;
  MessageLedger ledger;
  std::size_t rounds = 0;
  // first_arrival[v][u]: first round after which u is in sigma_v.
  std::vector<std::vector<std::size_t>> first_arrival;
};

// Number of ControlFlow edges that carry messages (self-loops excluded).
std::uint64_t message_edge_count(const Graph& g);

// Runs rounds until none of the reach sets changes. Symmetrized mode uses the
// bidirectional neighbourhood; Directed mode lets sigma flow only along edge
// direction. Throws InvalidGraph if g is not weakly connected.
StandardRun run_to_fixed_point(const Graph& g, DistanceMode mode = DistanceMode::Symmetrized);

struct IbpmRun {
  MessageLedger ledger;
  // Nodes (by dense id at the phase's level) that exchanged messages in each
  // phase, in schedule order.
  struct PhaseActivity {
    Phase phase;
    std::size_t level;
    std::vector<NodeId> active;
  };
  std::vector<PhaseActivity> activity;
};

class InvalidSequence : public Error {
 public:
  explicit InvalidSequence(const std::string& message) : Error("invalid-sequence", message) {}
};

// One ascent through the derived sequence followed by one descent, reaching
// the fixed point on every interval before changing level. Ascending, a new
// node's set is the union of its interval's sets; descending, sets restart
// at {v}. For a SingleNode terminal the top interval (the whole of the
// second-highest level) is visited once; for an Irreducible terminal the
// whole top graph is propagated once.
IbpmRun run_ibpm_to_fixed_point(const DerivedSequence& seq);

// Closed-form message count for the schedule above, computed from interval
// diameters and interval edge counts.
std::uint64_t ibpm_closed_form(const DerivedSequence& seq);

struct IbpmBound {
  std::size_t tau = 0;  // largest diameter among the propagation units
  std::uint64_t first_order_edges = 0;
  std::uint64_t bound = 0;  // 2 * tau * first_order_edges
  bool holds = true;
};

IbpmBound ibpm_bound(const DerivedSequence& seq, std::uint64_t simulated_total);
IbpmBound ibpm_bound(const DerivedSequence& seq);

// Diameters of every interval (with at least one member) across all levels.
std::vector<std::size_t> interval_diameters(const DerivedSequence& seq);

nlohmann::ordered_json ledger_to_json(const MessageLedger& ledger);

}  // namespace ibpm
