// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "ibpm/graph.hpp"
#include "ibpm/graph_gen.hpp"
#include "ibpm/graph_io.hpp"

using namespace ibpm;
using ibpm::testing::by_label;
using ibpm::testing::loop_nest_graph;
using ibpm::testing::all_pairs;
using ibpm::testing::labelled_graph;


TEST(GraphTest, PredecessorsOfSingleEdge) {
  const Graph g = labelled_graph({1, 2}, {{1, 2}}, 1);
  EXPECT_EQ(g.predecessors(by_label(g, 2), EdgeKind::ControlFlow), std::vector<NodeId>{by_label(g, 1)});
  EXPECT_TRUE(g.predecessors(by_label(g, 1), EdgeKind::ControlFlow).empty());
}

TEST(GraphTest, NeighboursOnLoopNest) {
  const Graph g = loop_nest_graph();
  EXPECT_EQ(g.predecessors(by_label(g, 2), EdgeKind::ControlFlow),
            (std::vector<NodeId>{by_label(g, 1), by_label(g, 7)}));
  EXPECT_EQ(g.successors(by_label(g, 2), EdgeKind::ControlFlow),
            (std::vector<NodeId>{by_label(g, 3), by_label(g, 7)}));
  EXPECT_TRUE(g.predecessors(by_label(g, 2), EdgeKind::DataDependency).empty());
}

TEST(GraphTest, SinkHasNoSuccessors) {
  const Graph g = labelled_graph({1, 2}, {{1, 2}}, 1);
  EXPECT_TRUE(g.successors(by_label(g, 2), EdgeKind::ControlFlow).empty());
}

TEST(GraphTest, UnknownNodeIsInvalidArgument) {
  const Graph g = labelled_graph({1, 2}, {{1, 2}}, 1);
  EXPECT_THROW(g.predecessors(5, EdgeKind::ControlFlow), InvalidArgument);
  EXPECT_THROW(g.successors(5, EdgeKind::ControlFlow), InvalidArgument);
  EXPECT_THROW(distance(g, 0, 9, DistanceMode::Directed), InvalidArgument);
}

TEST(GraphTest, ParallelEdgesCollapsePerKind) {
  GraphBuilder b(2);
  EXPECT_TRUE(b.add_edge(0, 1));
  EXPECT_FALSE(b.add_edge(0, 1));
  EXPECT_TRUE(b.add_edge(0, 1, EdgeKind::DataDependency));
  const Graph g = b.build();
  EXPECT_EQ(g.edges().size(), 2u);
  EXPECT_EQ(g.edge_count(EdgeKind::ControlFlow), 1u);
}

TEST(GraphTest, DuplicateLabelRejected) {
  GraphBuilder b;
  b.add_node(4);
  EXPECT_THROW(b.add_node(4), InvalidArgument);
}

TEST(GraphTest, DistanceExamples) {
  const Graph chain = labelled_graph({1, 2, 3}, {{1, 2}, {2, 3}}, 1);
  EXPECT_EQ(distance(chain, 0, 0, DistanceMode::Directed), 0u);
  EXPECT_EQ(distance(chain, 0, 2, DistanceMode::Directed), 2u);
  EXPECT_EQ(distance(chain, 2, 0, DistanceMode::Directed), std::nullopt);
  EXPECT_EQ(distance(chain, 2, 0, DistanceMode::Symmetrized), 2u);
}

TEST(GraphTest, DiameterExamples) {
  EXPECT_EQ(diameter(labelled_graph({1}, {}, 1), DistanceMode::Directed), 0u);
  const Graph cycle = labelled_graph({1, 2, 3}, {{1, 2}, {2, 3}, {3, 1}}, 1);
  EXPECT_EQ(diameter(cycle, DistanceMode::Directed), 2u);
  EXPECT_EQ(diameter(cycle, DistanceMode::Symmetrized), 1u);
  const Graph chain = labelled_graph({1, 2, 3, 4}, {{1, 2}, {2, 3}, {3, 4}}, 1);
  EXPECT_EQ(diameter(chain, DistanceMode::Symmetrized), 3u);
}

TEST(GraphTest, DiameterUndefinedCarriesPair) {
  const Graph chain = labelled_graph({1, 2, 3}, {{1, 2}, {2, 3}}, 1);
  try {
    diameter(chain, DistanceMode::Directed);
    FAIL() << "expected DiameterUndefined";
  } catch (const DiameterUndefined& e) {
    EXPECT_EQ(e.from, 1u);
    EXPECT_EQ(e.to, 0u);
  }
  const Graph split = labelled_graph({1, 2, 3}, {{1, 2}}, 1);
  EXPECT_THROW(diameter(split, DistanceMode::Symmetrized), DiameterUndefined);
}

TEST(GraphTest, SelfLoopsIgnoredByDistance) {
  GraphBuilder b(2);
  b.add_edge(0, 0);
  b.add_edge(0, 1);
  const Graph g = b.build();
  EXPECT_EQ(diameter(g, DistanceMode::Symmetrized), 1u);
}

TEST(GraphProperty, PredecessorSuccessorDuality) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const Graph g = random_weakly_connected(rng, 12);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      for (NodeId u : g.predecessors(v, EdgeKind::ControlFlow)) {
        const auto succ = g.successors(u, EdgeKind::ControlFlow);
        EXPECT_TRUE(std::binary_search(succ.begin(), succ.end(), v));
      }
      for (NodeId w : g.successors(v, EdgeKind::ControlFlow)) {
        const auto pred = g.predecessors(w, EdgeKind::ControlFlow);
        EXPECT_TRUE(std::binary_search(pred.begin(), pred.end(), v));
      }
    }
  }
}

TEST(GraphProperty, DistancesMatchBruteForceAndTriangleInequality) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const Graph g = random_weakly_connected(rng, 12);
    for (DistanceMode mode : {DistanceMode::Directed, DistanceMode::Symmetrized}) {
      const auto oracle = all_pairs(g, mode);
      const std::size_t n = g.node_count();
      std::size_t best = 0;
      bool connected = true;
      for (NodeId u = 0; u < n; ++u) {
        const auto row = distances_from(g, u, mode);
        ASSERT_EQ(row, oracle[u]);
        for (NodeId v = 0; v < n; ++v) {
          if (row[v] == kUnreachable) {
            connected = false;
            continue;
          }
          best = std::max(best, row[v]);
          for (NodeId w = 0; w < n; ++w) {
            if (oracle[v][w] != kUnreachable) {
              ASSERT_LE(oracle[u][w], row[v] + oracle[v][w]);
            }
          }
        }
      }
      if (connected) {
        EXPECT_EQ(diameter(g, mode), best);
      } else {
        EXPECT_THROW(diameter(g, mode), DiameterUndefined);
      }
    }
  }
}

TEST(GraphIo, RoundTripIsByteStable) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    GraphBuilder b;
    const Graph base = random_weakly_connected(rng, 12);
    for (NodeId v = 0; v < base.node_count(); ++v) b.add_node(10 + 3 * v);
    for (const Edge& e : base.edges()) b.add_edge(e.src, e.dst, e.kind);
    b.add_edge(0, static_cast<NodeId>(base.node_count() - 1), EdgeKind::DataDependency);
    b.set_entry(0);
    const Graph g = b.build();
    const std::string text = write_graph(g);
    const Graph back = read_graph(text);
    EXPECT_EQ(back, g);
    EXPECT_EQ(write_graph(back), text);
  }
}

TEST(GraphIo, RejectsBadDocuments) {
  EXPECT_THROW(read_graph("{"), FormatError);
  EXPECT_THROW(read_graph(R"({"version": 7, "nodes": []})"), FormatError);
  EXPECT_THROW(read_graph(R"({"version": 1, "nodes": [1], "edges": [{"src": 1, "dst": 2}]})"),
               InvalidArgument);
  EXPECT_THROW(
      read_graph(R"({"version": 1, "nodes": [1, 2], "edges": [{"src": 1, "dst": 2, "kind": "Foo"}]})"),
      InvalidArgument);
}

TEST(GraphIo, ExtensionKindsRoundTrip) {
  EXPECT_EQ(edge_kind_from_string("ext:9"), static_cast<EdgeKind>(9));
  EXPECT_EQ(to_string(static_cast<EdgeKind>(9)), "ext:9");
}

TEST(GraphIo, DotMentionsEveryEdge) {
  const std::string dot = graph_to_dot(loop_nest_graph(), "loop_nest");
  EXPECT_NE(dot.find("digraph loop_nest"), std::string::npos);
  EXPECT_NE(dot.find("n7 -> n2"), std::string::npos);
}
