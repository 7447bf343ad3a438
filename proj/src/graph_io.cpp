// SPDX-License-Identifier: Apache-2.0
#include "ibpm/graph_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace ibpm {

nlohmann::ordered_json graph_to_json(const Graph& g) {
  nlohmann::ordered_json doc;
  doc["version"] = kGraphFormatVersion;
  doc["nodes"] = g.labels();
  if (g.entry()) {
    doc["entry"] = g.label(*g.entry());
  } else {
    doc["entry"] = nullptr;
  }
  auto edges = nlohmann::ordered_json::array();
  for (const Edge& e : g.edges()) {
    nlohmann::ordered_json item;
    item["src"] = g.label(e.src);
    item["dst"] = g.label(e.dst);
    item["kind"] = to_string(e.kind);
    edges.push_back(std::move(item));
  }
  doc["edges"] = std::move(edges);
  return doc;
}

Graph graph_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw FormatError("graph document must be an object");
    if (!doc.contains("version") || doc.at("version").get<int>() != kGraphFormatVersion) {
      throw FormatError("unsupported graph format version");
    }
    GraphBuilder builder;
    std::map<std::uint64_t, NodeId> index;
    for (const auto& label : doc.at("nodes")) {
      const auto value = label.get<std::uint64_t>();
      index[value] = builder.add_node(value);
    }
    auto lookup = [&](const nlohmann::json& label) {
      const auto value = label.get<std::uint64_t>();
      auto it = index.find(value);
      if (it == index.end()) {
        throw InvalidArgument("edge references unknown node " + std::to_string(value));
      }
      return it->second;
    };
    if (doc.contains("entry") && !doc.at("entry").is_null()) {
      builder.set_entry(lookup(doc.at("entry")));
    }
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        const EdgeKind kind =
            e.contains("kind") ? edge_kind_from_string(e.at("kind").get<std::string>())
                               : EdgeKind::ControlFlow;
        builder.add_edge(lookup(e.at("src")), lookup(e.at("dst")), kind);
      }
    }
    return builder.build();
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed graph document: ") + ex.what());
  }
}

std::string write_graph(const Graph& g) { return graph_to_json(g).dump(2) + "\n"; }

Graph read_graph(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("graph is not valid JSON: ") + ex.what());
  }
  return graph_from_json(doc);
}

Graph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open graph file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return read_graph(buffer.str());
}

std::string graph_to_dot(const Graph& g, const std::string& name) {
  std::ostringstream out;
  out << "digraph " << name << " {\n";
  for (NodeId v = 0; v < g.node_count(); ++v) {
    out << "  n" << g.label(v) << " [label=\"" << g.label(v) << "\"";
    if (g.entry() && *g.entry() == v) out << ", shape=doublecircle";
    out << "];\n";
  }
  for (const Edge& e : g.edges()) {
    out << "  n" << g.label(e.src) << " -> n" << g.label(e.dst);
    switch (e.kind) {
      case EdgeKind::ControlFlow:
        break;
      case EdgeKind::DataDependency:
        out << " [style=dashed, color=blue]";
        break;
      case EdgeKind::Call:
        out << " [style=bold, color=red]";
        break;
      default:
        out << " [style=dotted]";
        break;
    }
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace ibpm
