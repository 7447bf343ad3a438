// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

#include "ibpm/graph.hpp"

namespace ibpm {

inline constexpr int kGraphFormatVersion = 1;

// {version, nodes: [label...], entry: label|null, edges: [{src, dst, kind}]}.
// Nodes appear in dense-id order and edges in canonical order, so writing a
// parsed document reproduces it byte for byte.
nlohmann::ordered_json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& doc);

std::string write_graph(const Graph& g);
Graph read_graph(const std::string& text);
Graph load_graph_file(const std::string& path);

// Graphviz rendering for inspection; `name` becomes the digraph id.
std::string graph_to_dot(const Graph& g, const std::string& name = "g");

}  // namespace ibpm
