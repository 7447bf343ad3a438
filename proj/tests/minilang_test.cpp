// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

#include "ibpm/intervals.hpp"
#include "ibpm/minilang/generator.hpp"
#include "ibpm/minilang/injector.hpp"
#include "ibpm/minilang/interpreter.hpp"
#include "ibpm/minilang/method_graph.hpp"
#include "ibpm/minilang/parser.hpp"
#include "ibpm/minilang/printer.hpp"

using namespace ibpm;
using namespace ibpm::minilang;

namespace {

const char* kShapes = R"(class Shape {
  int w;
}
class Box extends Shape {
  int h;
}
class Cube extends Box {
  int d;
}
)";

std::string with_shapes(const std::string& body) { return std::string(kShapes) + body; }

bool has_token(const MethodGraph& mg, NodeId v, const std::string& t) {
  return std::find(mg.tokens[v].begin(), mg.tokens[v].end(), t) != mg.tokens[v].end();
}

std::vector<GeneratedProgram> generated(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<GeneratedProgram> out;
  for (int k = 0; k < count; ++k) out.push_back(generate_program(rng));
  return out;
}

}  // namespace

// ---- lexer and parser ----

TEST(Lexer, TokensAndComments) {
  const auto toks = lex("x = a[i]; // trailing\n  return 42;");
  std::vector<std::string> text;
  for (const auto& t : toks) text.push_back(t.text);
  EXPECT_EQ(text, (std::vector<std::string>{"x", "=", "a", "[", "i", "]", ";", "return", "42", ";", ""}));
  EXPECT_EQ(toks[7].kind, TokenKind::Keyword);
  EXPECT_EQ(toks[7].line, 2);
  EXPECT_EQ(toks[7].column, 3);
  EXPECT_EQ(toks.back().kind, TokenKind::End);
}

TEST(Lexer, RejectsStrayCharacters) {
  try {
    lex("x = 1;\n  y @ 2;");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 5);
  }
}

TEST(Parser, EmptyMethod) {
  const Program p = parse("void m() { }");
  ASSERT_EQ(p.methods.size(), 1u);
  EXPECT_TRUE(p.methods[0].body.empty());
  EXPECT_EQ(p.methods[0].ret, Type::none());
}

TEST(Parser, ArrayIndexStatement) {
  const Program p = parse("int m(int[] a, int i) {\n  int x = 0;\n  x = a[i];\n  return x;\n}");
  const Stmt& s = p.methods[0].body[1];
  EXPECT_EQ(s.kind, StmtKind::Assign);
  EXPECT_EQ(s.name, "x");
  ASSERT_EQ(s.exprs.size(), 1u);
  EXPECT_EQ(s.exprs[0].kind, ExprKind::Index);
  std::vector<std::string> reads;
  collect_reads(s.exprs[0], reads);
  EXPECT_EQ(reads, (std::vector<std::string>{"a", "i"}));
  EXPECT_EQ(s.line, 3);
}

TEST(Parser, ClassesAndInheritance) {
  const Program p = parse(with_shapes("int m(Shape s) { return 0; }"));
  ClassTable ct(p.classes);
  EXPECT_EQ(ct.chain("Cube"), (std::vector<std::string>{"Cube", "Box", "Shape", "Object"}));
  EXPECT_TRUE(ct.is_subclass("Cube", "Shape"));
  EXPECT_FALSE(ct.is_subclass("Shape", "Box"));
  EXPECT_EQ(ct.fields("Cube"), (std::vector<std::string>{"d", "h", "w"}));
  EXPECT_TRUE(ct.has_field("Box", "w"));
}

TEST(Parser, CastsInstanceofAndPrecedence) {
  const Program p = parse(with_shapes(
      "int m(Shape s, int a, int b) {\n  int x = a - (b - 1) * 2;\n"
      "  if (s instanceof Box) {\n    Box q = (Box) s;\n    x = q.h;\n  }\n  return -x;\n}"));
  const auto& body = p.methods[0].body;
  const Expr& rhs = body[0].exprs[0];
  EXPECT_EQ(rhs.op, "-");
  EXPECT_EQ(rhs.args[1].op, "*");
  EXPECT_EQ(rhs.args[1].args[0].op, "-");
  EXPECT_EQ(body[1].exprs[0].kind, ExprKind::InstanceOf);
  EXPECT_EQ(body[1].body[0].exprs[0].kind, ExprKind::Cast);
  EXPECT_EQ(print(rhs), "a - (b - 1) * 2");
}

struct BadSource {
  const char* source;
  int line;
  int column;
  const char* fragment;
};

class ParseErrors : public ::testing::TestWithParam<BadSource> {};

TEST_P(ParseErrors, ReportsPosition) {
  const auto& c = GetParam();
  try {
    parse(c.source);
    FAIL() << "accepted: " << c.source;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), c.line) << e.what();
    EXPECT_EQ(e.column(), c.column) << e.what();
    EXPECT_NE(std::string(e.what()).find(c.fragment), std::string::npos) << e.what();
    EXPECT_EQ(e.kind(), "parse");
  }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, ParseErrors,
    ::testing::Values(BadSource{"int m() {\n  return y;\n}", 2, 10, "undeclared identifier y"},
                      BadSource{"int m() {\n  Foo p = null;\n  return 0;\n}", 2, 3, "unknown class"},
                      BadSource{"int m() {\n  int x = ;\n}", 2, 11, "expected"},
                      BadSource{"int m() {\n  int x = 1;\n  int x = 2;\n  return x;\n}", 3, 7, "x"},
                      BadSource{"int m() {\n  return 1;\n  int x = 2;\n}", 3, 3, "unreachable"},
                      BadSource{"int m(int a) {\n  if (a < 1) {\n    return 1;\n  } else {\n    return 2;\n  }\n"
                                "  return 3;\n}",
                                7, 3, "unreachable"},
                      BadSource{"int f(int a) { return a; }\nint m() {\n  return f(1, 2);\n}", 3, 10, "f"},
                      BadSource{"class A { int x; }\nint m(A a) {\n  return a.y;\n}", 3, 12, "y"}));

TEST(Printer, RoundTripOnHandProgram) {
  const std::string src = with_shapes(
      "int m(Shape s, int[] a, int n) {\n  int x = 0;\n  int[] c = new int[n + 1];\n  if (s != null) {\n"
      "    s.w = x;\n  } else {\n    x = len(a);\n  }\n  while (x < 3) {\n    x = x + 1;\n  }\n"
      "  Shape t = new Cube();\n  return x;\n}\n");
  const Program p = parse(src);
  EXPECT_EQ(print(p), src);
  EXPECT_EQ(parse(print(p)), p);
}

TEST(Printer, RoundTripOnGeneratedPrograms) {
  for (const auto& g : generated(11, 200)) {
    const Program again = parse(print(g.program));
    EXPECT_EQ(again, g.program);
    EXPECT_EQ(print(again), g.source);
  }
}

TEST(Printer, AssignLinesMatchesParsedLines) {
  for (const auto& g : generated(12, 50)) {
    Program p = g.program;
    for (auto& m : p.methods) for_each_stmt(m.body, [](Stmt& s) { s.line = 0; });
    assign_lines(p);
    std::vector<int> a, b;
    for (const auto& m : p.methods) for_each_stmt(m.body, [&](const Stmt& s) { a.push_back(s.line); });
    for (const auto& m : g.program.methods) for_each_stmt(m.body, [&](const Stmt& s) { b.push_back(s.line); });
    EXPECT_EQ(a, b);
  }
}

TEST(Parser, Deterministic) {
  const auto g = generated(13, 1).front();
  EXPECT_EQ(parse(g.source), parse(g.source));
}

// ---- CFG ----

TEST(Cfg, StraightLineIsAChainWithOneInterval) {
  const Program p = parse("int m(int a) {\n  int x = a;\n  int y = x + 1;\n  return y;\n}");
  const MethodGraph mg = build_cfg(p, ClassTable(p.classes), "m");
  ASSERT_EQ(mg.graph.node_count(), 4u);
  EXPECT_EQ(mg.graph.entry(), NodeId{0});
  for (NodeId v = 0; v + 1 < 4; ++v) {
    EXPECT_EQ(mg.graph.successors(v, EdgeKind::ControlFlow), std::vector<NodeId>{v + 1});
  }
  EXPECT_EQ(partition(mg.graph).intervals.size(), 1u);
  EXPECT_EQ(mg.rankable, (std::vector<NodeId>{1, 2, 3}));
  EXPECT_EQ(mg.lines, (std::vector<int>{1, 2, 3, 4}));
}

TEST(Cfg, LoopHeaderStartsItsOwnInterval) {
  const Program p = parse(
      "int m(int[] a) {\n  int s = 0;\n  int i = 0;\n  while (i < len(a)) {\n    s = s + a[i];\n"
      "    i = i + 1;\n  }\n  return s;\n}");
  const MethodGraph mg = build_cfg(p, ClassTable(p.classes), "m");
  const auto part = partition(mg.graph);
  const NodeId header = *mg.node_at_line(4);
  EXPECT_EQ(part.intervals.size(), 2u);
  EXPECT_EQ(part.intervals[part.node_to_interval[header]].header, header);
  EXPECT_NE(part.node_to_interval[header], part.node_to_interval[0]);
  // Back edge from the last body statement to the condition.
  const auto preds = mg.graph.predecessors(header, EdgeKind::ControlFlow);
  EXPECT_NE(std::find(preds.begin(), preds.end(), *mg.node_at_line(6)), preds.end());
}

TEST(Cfg, NestedLoopsGiveAtLeastThreeLevels) {
  // Naive substring search: the inner loop collapses first, then the outer.
  const Program p = parse(
      "int find(int[] s, int[] t) {\n  int found = 0;\n  int i = 0;\n  while (i < len(s)) {\n"
      "    int j = 0;\n    int m = 1;\n    while (j < len(t)) {\n      if (i + j < len(s)) {\n"
      "        if (s[i + j] != t[j]) {\n          m = 0;\n        }\n      } else {\n        m = 0;\n      }\n"
      "      j = j + 1;\n    }\n    if (m == 1) {\n      found = found + 1;\n    }\n    i = i + 1;\n  }\n"
      "  return found;\n}");
  const MethodGraph mg = build_cfg(p, ClassTable(p.classes), "find");
  const auto seq = derive(mg.graph);
  EXPECT_GE(seq.levels.size(), 3u);
  EXPECT_EQ(seq.terminal, Terminal::SingleNode);
}

TEST(Cfg, IfElseJoinsBothBranches) {
  const Program p = parse(
      "int m(int a) {\n  int x = 0;\n  if (a < 3) {\n    x = 1;\n  } else {\n    x = 2;\n  }\n  return x;\n}");
  const MethodGraph mg = build_cfg(p, ClassTable(p.classes), "m");
  const NodeId ret = *mg.node_at_line(8);
  EXPECT_EQ(mg.graph.predecessors(ret, EdgeKind::ControlFlow),
            (std::vector<NodeId>{*mg.node_at_line(4), *mg.node_at_line(6)}));
  // Both branch definitions of x reach the return.
  EXPECT_EQ(mg.graph.predecessors(ret, EdgeKind::DataDependency),
            (std::vector<NodeId>{*mg.node_at_line(4), *mg.node_at_line(6)}));
}

TEST(Cfg, ReturnInsideBranchEndsFlow) {
  const Program p = parse("int m(int a) {\n  if (a < 3) {\n    return 1;\n  }\n  return 2;\n}");
  const MethodGraph mg = build_cfg(p, ClassTable(p.classes), "m");
  EXPECT_TRUE(mg.graph.successors(*mg.node_at_line(3), EdgeKind::ControlFlow).empty());
  EXPECT_EQ(mg.graph.predecessors(*mg.node_at_line(5), EdgeKind::ControlFlow),
            std::vector<NodeId>{*mg.node_at_line(2)});
}

TEST(Cfg, TokensEncodeNullTypesLengthsAndCasts) {
  const Program p = parse(with_shapes(
      "int m(Shape s, int[] a, int n) {\n  int x = 0;\n  int[] c = new int[n + 1];\n  if (s != null) {\n"
      "    x = s.w;\n  }\n  x = x + c[n] + a[0];\n  Box b = (Box) s;\n  return x;\n}"));
  const MethodGraph mg = build_cfg(p, ClassTable(p.classes), "m");
  const NodeId guard = *mg.node_at_line(13);
  EXPECT_TRUE(has_token(mg, guard, "NULL"));
  EXPECT_FALSE(has_token(mg, guard, "null"));
  EXPECT_FALSE(has_token(mg, guard, "{"));
  const NodeId deref = *mg.node_at_line(14);
  for (const char* t : {"Shape", "Object", "int"}) EXPECT_TRUE(has_token(mg, deref, t)) << t;

  const NodeId index = *mg.node_at_line(16);
  const auto& tk = mg.tokens[index];
  // c's length is known from its allocation, a's is not.
  const auto len = std::find(tk.begin(), tk.end(), "LEN");
  ASSERT_NE(len, tk.end());
  EXPECT_EQ(std::vector<std::string>(len, len + 4), (std::vector<std::string>{"LEN", "n", "+", "1"}));
  EXPECT_TRUE(has_token(mg, index, "LEN_UNKNOWN"));

  const NodeId cast = *mg.node_at_line(17);
  EXPECT_TRUE(has_token(mg, cast, "CAST:Box"));
  const auto& ct = mg.tokens[cast];
  // Declared type chain of b, then of s.
  const auto box = std::find(ct.begin() + 1, ct.end(), "Box");
  EXPECT_NE(box, ct.end());
}

namespace {

// Independent def/use extraction straight from the AST.
void reads_of(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Var || e.kind == ExprKind::Field || e.kind == ExprKind::Index) out.insert(e.name);
  for (const auto& a : e.args) reads_of(a, out);
}

struct DefUse {
  std::set<std::string> defs, uses;
};

std::vector<DefUse> def_use(const MethodGraph& mg, const Method& m) {
  std::vector<DefUse> out(mg.graph.node_count());
  for (const auto& p : m.params) out[0].defs.insert(p.name);
  for_each_stmt(m.body, [&](const Stmt& s) {
    DefUse& du = out[*mg.node_at_line(s.line)];
    for (const auto& e : s.exprs) reads_of(e, du.uses);
    if (s.kind == StmtKind::Decl || s.kind == StmtKind::Assign) du.defs.insert(s.name);
    if (s.kind == StmtKind::FieldStore || s.kind == StmtKind::ArrayStore) du.uses.insert(s.name);
  });
  return out;
}

// (u, v) iff some path u -> ... -> v of length >= 1 avoids redefining a
// variable written at u and read at v.
std::set<std::pair<NodeId, NodeId>> brute_force_dd(const MethodGraph& mg, const Method& m) {
  const auto du = def_use(mg, m);
  std::set<std::pair<NodeId, NodeId>> out;
  for (NodeId u = 0; u < mg.graph.node_count(); ++u) {
    for (const auto& x : du[u].defs) {
      std::vector<bool> seen(mg.graph.node_count());
      std::deque<NodeId> queue;
      for (NodeId w : mg.graph.successors(u, EdgeKind::ControlFlow)) queue.push_back(w);
      while (!queue.empty()) {
        const NodeId w = queue.front();
        queue.pop_front();
        if (seen[w]) continue;
        seen[w] = true;
        if (du[w].uses.count(x)) out.insert({u, w});
        if (du[w].defs.count(x)) continue;
        for (NodeId next : mg.graph.successors(w, EdgeKind::ControlFlow)) queue.push_back(next);
      }
    }
  }
  return out;
}

}  // namespace

TEST(Cfg, DataDependenciesMatchBruteForce) {
  int checked = 0;
  for (const auto& g : generated(21, 300)) {
    const Method& m = *g.program.find_method(g.target);
    std::size_t stmts = 0;
    for_each_stmt(m.body, [&](const Stmt&) { ++stmts; });
    if (stmts > 50) continue;
    const MethodGraph mg = build_cfg(g.program, ClassTable(g.program.classes), g.target);
    std::set<std::pair<NodeId, NodeId>> actual;
    for (const Edge& e : mg.graph.edges()) {
      if (e.kind == EdgeKind::DataDependency) actual.insert({e.src, e.dst});
    }
    ASSERT_EQ(actual, brute_force_dd(mg, m)) << g.source;
    ++checked;
  }
  EXPECT_GT(checked, 250);
}

TEST(Cfg, GeneratedGraphsAreReducibleWithValidIntervals) {
  for (const auto& g : generated(22, 200)) {
    const ClassTable ct(g.program.classes);
    for (int depth : {0, 2}) {
      const MethodGraph mg = inline_calls(build_cfg(g.program, ct, g.target), g.program, ct, depth);
      ASSERT_TRUE(mg.graph.entry().has_value());
      const auto reach = reachable_from_entry(mg.graph);
      EXPECT_TRUE(std::all_of(reach.begin(), reach.end(), [](bool b) { return b; }));
      const auto seq = derive(mg.graph);
      EXPECT_EQ(seq.terminal, Terminal::SingleNode) << g.source;
      for (const auto& level : seq.levels) {
        for (const auto& iv : level.partition.intervals) {
          EXPECT_TRUE(check_interval(level.graph, iv).empty());
        }
      }
    }
  }
}

TEST(Cfg, JsonListsNodesAndEdges) {
  const Program p = parse("int m(int a) {\n  int x = a;\n  return x;\n}");
  const auto j = method_graph_to_json(build_cfg(p, ClassTable(p.classes), "m"));
  EXPECT_EQ(j["method"], "m");
  EXPECT_EQ(j["nodes"].size(), 3u);
  EXPECT_EQ(j["nodes"][1]["line"], 2);
  EXPECT_EQ(j["nodes"][0]["rankable"], false);
  bool dd = false;
  for (const auto& e : j["edges"]) dd = dd || e["kind"] == "DataDependency";
  EXPECT_TRUE(dd);
}

TEST(Cfg, LabelFault) {
  const Program p = parse("int m(int a) {\n  int x = a;\n  return x;\n}");
  MethodGraph mg = build_cfg(p, ClassTable(p.classes), "m");
  label_fault(mg, 2, BugKind::NullDeref);
  EXPECT_EQ(mg.labels, (std::vector<int>{0, 1, 0}));
  EXPECT_TRUE(mg.buggy());
  EXPECT_THROW(label_fault(mg, 1, BugKind::NullDeref), InvalidArgument);  // the signature is not ranked
  EXPECT_THROW(label_fault(mg, 9, BugKind::NullDeref), InvalidArgument);
}

// ---- inlining ----

namespace {

const char* kCalls = R"(int leaf(int a) {
  return a + 1;
}
int left(int a) {
  int x = leaf(a);
  return x;
}
int right(int a) {
  int y = leaf(a) + leaf(a);
  return y;
}
int top(int a) {
  int l = left(a);
  int r = right(a);
  return l + r;
}
int loop(int a) {
  int z = loop(a);
  return z + leaf(a);
}
)";

}  // namespace

TEST(Inliner, DepthZeroIsIdentity) {
  const Program p = parse(kCalls);
  const ClassTable ct(p.classes);
  const MethodGraph mg = build_cfg(p, ct, "top");
  const MethodGraph same = inline_calls(mg, p, ct, 0);
  EXPECT_EQ(same.graph, mg.graph);
  EXPECT_EQ(same.tokens, mg.tokens);
  EXPECT_THROW(inline_calls(mg, p, ct, 3), InvalidArgument);
}

TEST(Inliner, OneCalleeAddsItsNodesAndSeam) {
  const Program p = parse(kCalls);
  const ClassTable ct(p.classes);
  const MethodGraph caller = build_cfg(p, ct, "left");
  const MethodGraph callee = build_cfg(p, ct, "leaf");
  const MethodGraph mg = inline_calls(caller, p, ct, 1);
  EXPECT_EQ(mg.graph.node_count(), caller.graph.node_count() + callee.graph.node_count());
  const NodeId site = *mg.node_at_line(5);
  const NodeId entry = static_cast<NodeId>(caller.graph.node_count());
  EXPECT_EQ(mg.owner[entry], "leaf");
  EXPECT_EQ(mg.graph.successors(site, EdgeKind::Call), std::vector<NodeId>{entry});
  EXPECT_EQ(mg.rankable, caller.rankable);
  EXPECT_EQ(mg.graph.edge_count(EdgeKind::Call), 1u);
}

TEST(Inliner, DiamondInlinesSharedCalleeOnce) {
  const Program p = parse(kCalls);
  const ClassTable ct(p.classes);
  const MethodGraph base = build_cfg(p, ct, "top");
  std::size_t expected = base.graph.node_count();
  for (const char* m : {"left", "right", "leaf"}) expected += build_cfg(p, ct, m).graph.node_count();
  const MethodGraph mg = inline_calls(base, p, ct, 2);
  EXPECT_EQ(mg.graph.node_count(), expected);
  EXPECT_EQ(std::count(mg.owner.begin(), mg.owner.end(), "leaf"), 2);  // signature + return
  // left's and right's call sites both point at the one copy of leaf.
  EXPECT_EQ(mg.graph.edge_count(EdgeKind::Call), 4u);

  const MethodGraph shallow = inline_calls(base, p, ct, 1);
  EXPECT_EQ(std::count(shallow.owner.begin(), shallow.owner.end(), "leaf"), 0);
}

TEST(Inliner, RecursiveCallsAreSkippedAndRecorded) {
  const Program p = parse(kCalls);
  const ClassTable ct(p.classes);
  const MethodGraph mg = inline_calls(build_cfg(p, ct, "loop"), p, ct, 2);
  EXPECT_EQ(mg.skipped_calls, std::vector<std::string>{"loop->loop"});
  EXPECT_EQ(std::count(mg.owner.begin(), mg.owner.end(), "leaf"), 2);
}

TEST(Inliner, KeepsLabels) {
  const Program p = parse(kCalls);
  const ClassTable ct(p.classes);
  MethodGraph mg = build_cfg(p, ct, "left");
  label_fault(mg, 5, BugKind::IndexOob);
  const MethodGraph big = inline_calls(mg, p, ct, 1);
  EXPECT_EQ(big.labels[*big.node_at_line(5)], 1);
  EXPECT_EQ(std::accumulate(big.labels.begin(), big.labels.end(), 0), 1);
  EXPECT_EQ(big.kind, BugKind::IndexOob);
}

// ---- interpreter ----

TEST(Interpreter, Arithmetic) {
  const Program p = parse("int m(int a) {\n  int x = a * 3 - 1;\n  return -x;\n}");
  const auto o = interpret(p, ClassTable(p.classes), "m", {Input::integer(4)});
  ASSERT_TRUE(o.ok());
  EXPECT_EQ(o.result, -11);
}

TEST(Interpreter, WrapsOnOverflow) {
  const Program p = parse("int m(int a) {\n  int x = a;\n  int i = 0;\n  while (i < 70) {\n    x = x * 2;\n"
                          "    i = i + 1;\n  }\n  return x + 1;\n}");
  const auto o = interpret(p, ClassTable(p.classes), "m", {Input::integer(1)});
  ASSERT_TRUE(o.ok());
  EXPECT_EQ(o.result, 1);
}

TEST(Interpreter, Faults) {
  const Program p = parse(with_shapes(
      "int m(Shape s, int[] a, int i) {\n  int x = 0;\n  if (i > 5) {\n    Box b = (Box) s;\n  }\n"
      "  x = a[i];\n  x = x + s.w;\n  return x;\n}"));
  const ClassTable ct(p.classes);
  auto run = [&](Input s, std::vector<std::int64_t> a, std::int64_t i) {
    return interpret(p, ct, "m", {std::move(s), Input::array(std::move(a)), Input::integer(i)});
  };
  EXPECT_EQ(to_string(run(Input::object("Shape", {4}), {1, 2}, 1)), "ok 6");
  EXPECT_EQ(to_string(run(Input::object("Shape"), {1, 2}, 2)), "fault IndexOob at line 15");
  EXPECT_EQ(to_string(run(Input::null(), {1, 2}, 0)), "fault NullDeref at line 16");
  EXPECT_EQ(to_string(run(Input::object("Shape"), {1, 2}, 6)), "fault BadCast at line 13");
  // Casting null and down-casting a real Box both succeed.
  EXPECT_EQ(run(Input::null(), std::vector<std::int64_t>(7), 6).fault, BugKind::NullDeref);
  EXPECT_TRUE(run(Input::object("Cube", {0, 0, 3}), std::vector<std::int64_t>(7), 6).ok());
}

TEST(Interpreter, InstanceofAndNullComparisons) {
  const Program p = parse(with_shapes(
      "int m(Shape s) {\n  int x = 0;\n  if (s instanceof Box) {\n    x = x + 1;\n  }\n"
      "  if (s == null) {\n    x = x + 10;\n  }\n  Shape t = s;\n  if (t == s) {\n    x = x + 100;\n  }\n"
      "  return x;\n}"));
  const ClassTable ct(p.classes);
  EXPECT_EQ(interpret(p, ct, "m", {Input::null()}).result, 110);
  EXPECT_EQ(interpret(p, ct, "m", {Input::object("Cube")}).result, 101);
  EXPECT_EQ(interpret(p, ct, "m", {Input::object("Shape")}).result, 100);
}

TEST(Interpreter, NegativeArraySizeIsOutOfBounds) {
  const Program p = parse("int m(int n) {\n  int[] a = new int[n - 3];\n  return len(a);\n}");
  const ClassTable ct(p.classes);
  EXPECT_EQ(interpret(p, ct, "m", {Input::integer(5)}).result, 2);
  EXPECT_EQ(to_string(interpret(p, ct, "m", {Input::integer(1)})), "fault IndexOob at line 2");
}

TEST(Interpreter, StepBudgetAndDeepRecursionTimeOut) {
  const Program p = parse("int spin() {\n  int x = 0;\n  while (x < 1) {\n    x = 0;\n  }\n  return x;\n}\n"
                          "int deep(int a) {\n  return deep(a + 1);\n}");
  const ClassTable ct(p.classes);
  EXPECT_EQ(interpret(p, ct, "spin", {}, 500).status, Outcome::Status::Timeout);
  EXPECT_EQ(interpret(p, ct, "deep", {Input::integer(0)}).status, Outcome::Status::Timeout);
  EXPECT_THROW(interpret(p, ct, "deep", {}), InvalidArgument);
  EXPECT_THROW(interpret(p, ct, "nope", {}), InvalidArgument);
}

TEST(Interpreter, CallsShareTheHeap) {
  const Program p = parse("int set(int[] a) {\n  a[0] = 9;\n  return 0;\n}\n"
                          "int m(int[] a) {\n  int x = set(a);\n  return a[0];\n}");
  EXPECT_EQ(interpret(p, ClassTable(p.classes), "m", {Input::array({1})}).result, 9);
}

TEST(Interpreter, CleanGeneratedProgramsRunOk) {
  Rng rng(5);
  for (const auto& g : generated(31, 200)) {
    const ClassTable ct(g.program.classes);
    for (int k = 0; k < 8; ++k) {
      const auto in = sample_inputs(*g.program.find_method(g.target), ct, rng);
      ASSERT_TRUE(interpret(g.program, ct, g.target, in).ok()) << g.source;
    }
  }
}

TEST(Interpreter, SampledInputsRespectConventions) {
  const Program p = parse(with_shapes("int m(Box b, int[] a, int n) { return n; }"));
  const ClassTable ct(p.classes);
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const auto in = sample_inputs(p.methods[0], ct, rng);
    ASSERT_EQ(in.size(), 3u);
    EXPECT_TRUE(in[0].kind == Input::Kind::Null || ct.is_subclass(in[0].cls, "Box"));
    EXPECT_EQ(in[1].kind, Input::Kind::Array);
    EXPECT_LE(in[1].data.size(), 6u);
    EXPECT_GE(in[2].value, 0);
    EXPECT_LE(in[2].value, 7);
  }
}

// ---- injection ----

TEST(Injector, RemovesNullGuard) {
  const Program p = parse(with_shapes(
      "int m(Shape p) {\n  int x = 0;\n  if (p != null) {\n    x = p.w;\n  }\n  return x;\n}"));
  const ClassTable ct(p.classes);
  Rng rng(3);
  const Injection inj = inject_bug(p, ct, "m", BugKind::NullDeref, rng);
  EXPECT_EQ(print(inj.program),
            with_shapes("int m(Shape p) {\n  int x = 0;\n  x = p.w;\n  return x;\n}\n"));
  EXPECT_EQ(inj.line, 12);
  ASSERT_EQ(inj.trigger.size(), 1u);
  EXPECT_EQ(inj.trigger[0].kind, Input::Kind::Null);
}

TEST(Injector, WidensLoopBound) {
  const Program p = parse(
      "int m(int[] a) {\n  int s = 0;\n  int i = 0;\n  while (i < len(a)) {\n    s = s + a[i];\n"
      "    i = i + 1;\n  }\n  return s;\n}");
  const ClassTable ct(p.classes);
  Rng rng(3);
  const Injection inj = inject_bug(p, ct, "m", BugKind::IndexOob, rng);
  EXPECT_EQ(print_header(inj.program.methods[0].body[2]), "while (i <= len(a)) {");
  EXPECT_EQ(inj.line, 5);
  const auto o = interpret(inj.program, ct, "m", inj.trigger);
  EXPECT_TRUE(o.faulted(BugKind::IndexOob));
  EXPECT_EQ(o.line, 5);
}

TEST(Injector, RemovesInstanceofGuard) {
  const Program p = parse(with_shapes(
      "int m(Shape p) {\n  int x = 0;\n  if (p instanceof Box) {\n    Box b = (Box) p;\n    x = b.h;\n  }\n"
      "  return x;\n}"));
  const ClassTable ct(p.classes);
  Rng rng(4);
  const Injection inj = inject_bug(p, ct, "m", BugKind::BadCast, rng);
  EXPECT_EQ(inj.line, 12);
  EXPECT_EQ(inj.trigger[0].cls, "Shape");
}

TEST(Injector, NoGuardsIsNotInjectable) {
  const Program p = parse(with_shapes("int m(Shape p, int[] a) {\n  int x = len(a);\n  return x;\n}"));
  const ClassTable ct(p.classes);
  Rng rng(1);
  for (BugKind k : {BugKind::NullDeref, BugKind::IndexOob, BugKind::BadCast}) {
    EXPECT_THROW(inject_bug(p, ct, "m", k, rng), NotInjectable);
  }
  EXPECT_THROW(inject_bug(p, ct, "m", BugKind::Clean, rng), InvalidArgument);
}

TEST(Injector, RedundantGuardIsNotInjectable) {
  // The guarded array always has room, so dropping the check changes nothing.
  const Program p = parse(
      "int m(int n) {\n  int[] c = new int[n + 1];\n  int x = 0;\n  if (n < len(c)) {\n    x = c[n];\n  }\n"
      "  return x;\n}");
  Rng rng(1);
  EXPECT_THROW(inject_bug(p, ClassTable(p.classes), "m", BugKind::IndexOob, rng), NotInjectable);
}

TEST(Injector, FaultLineMatchesInterpreterOnGeneratedPrograms) {
  Rng rng(8);
  int injected = 0;
  for (const auto& g : generated(41, 150)) {
    const ClassTable ct(g.program.classes);
    for (BugKind k : {BugKind::NullDeref, BugKind::IndexOob, BugKind::BadCast}) {
      Injection inj;
      try {
        inj = inject_bug(g.program, ct, g.target, k, rng);
      } catch (const NotInjectable&) {
        continue;
      }
      ++injected;
      const auto o = interpret(inj.program, ct, g.target, inj.trigger);
      ASSERT_TRUE(o.faulted(k));
      EXPECT_EQ(o.line, inj.line);
      EXPECT_TRUE(interpret(g.program, ct, g.target, inj.trigger).ok());
      MethodGraph mg = build_cfg(inj.program, ct, g.target);
      EXPECT_TRUE(mg.node_at_line(inj.line).has_value());
      EXPECT_EQ(parse(print(inj.program)), inj.program);
    }
  }
  EXPECT_GT(injected, 150);
}
