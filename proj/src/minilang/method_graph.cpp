// SPDX-License-Identifier: Apache-2.0
#include "ibpm/minilang/method_graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "ibpm/minilang/parser.hpp"
#include "ibpm/minilang/printer.hpp"

namespace ibpm::minilang {

namespace {

void collect_casts(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == ExprKind::Cast) out.push_back("CAST:" + e.name);
  for (const Expr& a : e.args) collect_casts(a, out);
}

std::vector<std::string> text_tokens(const std::string& text) {
  std::vector<std::string> out;
  for (const Token& t : lex(text)) {
    if (t.kind == TokenKind::End || t.text == "{" || t.text == ";") continue;
    out.push_back(t.text == "null" ? "NULL" : t.text);
  }
  return out;
}

class CfgBuilder {
 public:
  CfgBuilder(const ClassTable& classes, const Method& m) : classes_(classes), method_(m) {
    for_each_stmt(m.body, [&](const Stmt& s) {
      const bool decl_or_assign = s.kind == StmtKind::Decl || s.kind == StmtKind::Assign;
      if (decl_or_assign && !s.exprs.empty() && s.exprs[0].kind == ExprKind::NewArray) {
        lengths_[s.name].push_back(text_tokens(print(s.exprs[0].args[0])));
      }
    });
  }

  MethodGraph build() {
    mg_.method = method_.name;
    scopes_.emplace_back();
    std::vector<std::string> params;
    for (const Param& p : method_.params) {
      scopes_.back()[p.name] = p.type;
      params.push_back(p.name);
    }
    const NodeId entry = add(text_tokens(print_signature(method_)), method_.line, params, params, {}, {});
    builder_.set_entry(entry);
    block(method_.body, {entry});
    mg_.graph = builder_.build();
    add_data_dependencies();
    mg_.graph = builder_.build();
    mg_.labels.assign(mg_.graph.node_count(), 0);
    for (NodeId v = 1; v < mg_.graph.node_count(); ++v) mg_.rankable.push_back(v);
    return std::move(mg_);
  }

 private:
  const Type& type_of(const std::string& var) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(var);
      if (f != it->end()) return f->second;
    }
    throw InvalidArgument("variable " + var + " is not in scope");
  }

  void type_tokens(const std::string& var, std::vector<std::string>& out) const {
    const Type& t = type_of(var);
    if (t.kind == Type::Kind::Class) {
      for (const auto& c : classes_.chain(t.cls)) out.push_back(c);
      return;
    }
    out.push_back(to_string(t));
    if (t.kind != Type::Kind::IntArray) return;
    out.push_back("LEN");
    auto f = lengths_.find(var);
    if (f == lengths_.end() || f->second.size() != 1) {
      out.push_back("LEN_UNKNOWN");
    } else {
      out.insert(out.end(), f->second[0].begin(), f->second[0].end());
    }
  }

  NodeId add(std::vector<std::string> tokens, int line, const std::vector<std::string>& vars,
             const std::vector<std::string>& defs, const std::vector<std::string>& uses,
             const std::vector<std::string>& calls) {
    for (const auto& v : vars) type_tokens(v, tokens);
    const NodeId n = builder_.add_node();
    mg_.tokens.push_back(std::move(tokens));
    mg_.lines.push_back(line);
    mg_.owner.push_back(method_.name);
    mg_.calls.push_back(calls);
    defs_.push_back(defs);
    uses_.push_back(uses);
    return n;
  }

  NodeId statement_node(const Stmt& s) {
    std::vector<std::string> uses;
    std::vector<std::string> calls;
    std::vector<std::string> casts;
    if (s.kind == StmtKind::FieldStore || s.kind == StmtKind::ArrayStore) uses.push_back(s.name);
    for (const Expr& e : s.exprs) {
      collect_reads(e, uses);
      collect_calls(e, calls);
      collect_casts(e, casts);
    }
    std::vector<std::string> defs;
    if (s.kind == StmtKind::Decl) {
      scopes_.back()[s.name] = s.type;
      defs.push_back(s.name);
    } else if (s.kind == StmtKind::Assign) {
      defs.push_back(s.name);
    }
    std::vector<std::string> vars = defs;
    for (const auto& u : uses) {
      if (std::find(vars.begin(), vars.end(), u) == vars.end()) vars.push_back(u);
    }
    std::vector<std::string> tokens = text_tokens(print_header(s));
    tokens.insert(tokens.end(), casts.begin(), casts.end());
    return add(std::move(tokens), s.line, vars, defs, uses, calls);
  }

  void link(const std::vector<NodeId>& preds, NodeId to) {
    for (NodeId p : preds) builder_.add_edge(p, to, EdgeKind::ControlFlow);
  }

  // Returns the nodes control leaves the block from.
  std::vector<NodeId> block(const std::vector<Stmt>& stmts, std::vector<NodeId> preds) {
    scopes_.emplace_back();
    for (const Stmt& s : stmts) {
      const NodeId n = statement_node(s);
      link(preds, n);
      switch (s.kind) {
        case StmtKind::Return:
          preds.clear();
          break;
        case StmtKind::If: {
          std::vector<NodeId> out = block(s.body, {n});
          std::vector<NodeId> other = s.has_else ? block(s.orelse, {n}) : std::vector<NodeId>{n};
          out.insert(out.end(), other.begin(), other.end());
          preds = std::move(out);
          break;
        }
        case StmtKind::While:
          link(block(s.body, {n}), n);
          preds = {n};
          break;
        default:
          preds = {n};
          break;
      }
    }
    scopes_.pop_back();
    return preds;
  }

  // Classic reaching definitions; an edge joins a definition to every node
  // that reads the variable while the definition reaches it.
  void add_data_dependencies() {
    const Graph& g = mg_.graph;
    const std::size_t n = g.node_count();
    struct Def {
      NodeId node;
      std::string var;
    };
    std::vector<Def> defs;
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& x : defs_[v]) defs.push_back({v, x});
    }
    std::vector<std::vector<bool>> in(n, std::vector<bool>(defs.size())), out = in;
    bool changed = true;
    while (changed) {
      changed = false;
      for (NodeId v = 0; v < n; ++v) {
        std::vector<bool> next(defs.size());
        for (NodeId p : g.predecessors(v, EdgeKind::ControlFlow)) {
          for (std::size_t d = 0; d < defs.size(); ++d) next[d] = next[d] || out[p][d];
        }
        in[v] = next;
        const auto& killed = defs_[v];
        for (std::size_t d = 0; d < defs.size(); ++d) {
          if (defs[d].node == v) {
            next[d] = true;
          } else if (std::find(killed.begin(), killed.end(), defs[d].var) != killed.end()) {
            next[d] = false;
          }
        }
        if (next != out[v]) {
          out[v] = std::move(next);
          changed = true;
        }
      }
    }
    for (NodeId v = 0; v < n; ++v) {
      for (std::size_t d = 0; d < defs.size(); ++d) {
        if (!in[v][d]) continue;
        const auto& u = uses_[v];
        if (std::find(u.begin(), u.end(), defs[d].var) != u.end()) {
          builder_.add_edge(defs[d].node, v, EdgeKind::DataDependency);
        }
      }
    }
  }

  const ClassTable& classes_;
  const Method& method_;
  GraphBuilder builder_;
  MethodGraph mg_;
  std::vector<std::map<std::string, Type>> scopes_;
  std::map<std::string, std::vector<std::vector<std::string>>> lengths_;
  std::vector<std::vector<std::string>> defs_;
  std::vector<std::vector<std::string>> uses_;
};

// Call graph closure: can `from` reach `to` through calls (or be it)?
bool calls_reach(const Program& program, const std::string& from, const std::string& to) {
  std::set<std::string> seen{from};
  std::deque<std::string> queue{from};
  while (!queue.empty()) {
    const std::string m = queue.front();
    queue.pop_front();
    if (m == to) return true;
    const Method* method = program.find_method(m);
    if (!method) continue;
    std::vector<std::string> callees;
    for_each_stmt(method->body, [&](const Stmt& s) {
      for (const Expr& e : s.exprs) collect_calls(e, callees);
    });
    for (const auto& c : callees) {
      if (seen.insert(c).second) queue.push_back(c);
    }
  }
  return false;
}

}  // namespace

std::optional<NodeId> MethodGraph::node_at_line(int line) const {
  for (NodeId v : rankable) {
    if (lines[v] == line) return v;
  }
  return std::nullopt;
}

MethodGraph build_cfg(const Program& program, const ClassTable& classes, const std::string& method) {
  const Method* m = program.find_method(method);
  if (!m) throw InvalidArgument("no method named " + method);
  return CfgBuilder(classes, *m).build();
}

void label_fault(MethodGraph& mg, int line, BugKind kind) {
  const auto v = mg.node_at_line(line);
  if (!v) throw InvalidArgument("no statement of " + mg.method + " on line " + std::to_string(line));
  if (kind == BugKind::Clean) throw InvalidArgument("a fault needs a bug kind");
  mg.labels.assign(mg.graph.node_count(), 0);
  mg.labels[*v] = 1;
  mg.kind = kind;
}

MethodGraph inline_calls(const MethodGraph& mg, const Program& program, const ClassTable& classes, int depth) {
  if (depth < 0 || depth > 2) throw InvalidArgument("inline depth must be 0, 1 or 2");
  MethodGraph out = mg;
  if (depth == 0) return out;

  GraphBuilder builder(mg.graph.node_count());
  for (const Edge& e : mg.graph.edges()) builder.add_edge(e.src, e.dst, e.kind);
  builder.set_entry(*mg.graph.entry());

  std::map<std::string, NodeId> entry_of;
  std::vector<NodeId> frontier;
  for (NodeId v = 0; v < mg.graph.node_count(); ++v) frontier.push_back(v);

  for (int level = 0; level < depth; ++level) {
    std::vector<NodeId> next;
    for (NodeId site : frontier) {
      for (const std::string& callee : out.calls[site]) {
        const std::string& caller = out.owner[site];
        if (calls_reach(program, callee, caller)) {
          const std::string note = caller + "->" + callee;
          auto& skipped = out.skipped_calls;
          if (std::find(skipped.begin(), skipped.end(), note) == skipped.end()) skipped.push_back(note);
          continue;
        }
        if (!entry_of.count(callee)) {
          const MethodGraph sub = build_cfg(program, classes, callee);
          const NodeId offset = static_cast<NodeId>(builder.node_count());
          for (NodeId v = 0; v < sub.graph.node_count(); ++v) {
            builder.add_node();
            out.tokens.push_back(sub.tokens[v]);
            out.lines.push_back(sub.lines[v]);
            out.owner.push_back(sub.owner[v]);
            out.calls.push_back(sub.calls[v]);
            out.labels.push_back(0);
            next.push_back(offset + v);
          }
          for (const Edge& e : sub.graph.edges()) builder.add_edge(offset + e.src, offset + e.dst, e.kind);
          entry_of[callee] = offset;
        }
        builder.add_edge(site, entry_of[callee], EdgeKind::Call);
        builder.add_edge(site, entry_of[callee], EdgeKind::ControlFlow);
      }
    }
    frontier = std::move(next);
  }
  out.graph = builder.build();
  return out;
}

nlohmann::ordered_json method_graph_to_json(const MethodGraph& mg) {
  nlohmann::ordered_json j;
  j["method"] = mg.method;
  j["kind"] = to_string(mg.kind);
  j["entry"] = *mg.graph.entry();
  auto nodes = nlohmann::ordered_json::array();
  for (NodeId v = 0; v < mg.graph.node_count(); ++v) {
    nlohmann::ordered_json n;
    n["id"] = v;
    n["line"] = mg.lines[v];
    n["method"] = mg.owner[v];
    n["tokens"] = mg.tokens[v];
    n["rankable"] = std::find(mg.rankable.begin(), mg.rankable.end(), v) != mg.rankable.end();
    n["label"] = mg.labels[v];
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  auto edges = nlohmann::ordered_json::array();
  for (const Edge& e : mg.graph.edges()) {
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}});
  }
  j["edges"] = std::move(edges);
  j["skipped_calls"] = mg.skipped_calls;
  return j;
}

}  // namespace ibpm::minilang
