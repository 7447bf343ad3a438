// SPDX-License-Identifier: Apache-2.0
//
// Seeded random graph families used by the simulator property suites and the
// `simulate --trials` driver.
#pragma once

#include <cstddef>

#include "ibpm/graph.hpp"
#include "ibpm/rng.hpp"

namespace ibpm {

// Weakly connected ControlFlow graph with 1..max_nodes nodes: a random tree
// with random edge orientation plus extra random edges. No self-loops.
Graph random_weakly_connected(Rng& rng, std::size_t max_nodes = 12);

// CFG-like graph built from nested sequence / if / while skeletons, hence
// reducible. Node count lies in [min_nodes, max_nodes]. Entry is node 0.
Graph random_structured_cfg(Rng& rng, std::size_t min_nodes = 3, std::size_t max_nodes = 60);

// Structured CFG with an extra edge jumping into the middle of a loop so that
// the loop gains a second entry; retried until the derived sequence ends
// Irreducible.
Graph random_irreducible_cfg(Rng& rng, std::size_t min_nodes = 4, std::size_t max_nodes = 60);

}  // namespace ibpm
