// SPDX-License-Identifier: Apache-2.0
#include "ibpm/minilang/printer.hpp"

#include <sstream>

namespace ibpm::minilang {

namespace {

int precedence(const Expr& e) {
  if (e.kind == ExprKind::InstanceOf) return 1;
  if (e.kind != ExprKind::Binary) return 10;
  if (e.op == "+" || e.op == "-") return 2;
  if (e.op == "*") return 3;
  return 1;
}

std::string wrap(const Expr& e, bool parens) { return parens ? "(" + print(e) + ")" : print(e); }

void print_block(std::ostringstream& out, const std::vector<Stmt>& block, int depth);

void print_stmt(std::ostringstream& out, const Stmt& s, int depth) {
  const std::string indent(2 * depth, ' ');
  out << indent << print_header(s) << "\n";
  if (!s.compound()) return;
  print_block(out, s.body, depth + 1);
  if (s.has_else) {
    out << indent << "} else {\n";
    print_block(out, s.orelse, depth + 1);
  }
  out << indent << "}\n";
}

void print_block(std::ostringstream& out, const std::vector<Stmt>& block, int depth) {
  for (const Stmt& s : block) print_stmt(out, s, depth);
}

void number_block(std::vector<Stmt>& block, int& line) {
  for (Stmt& s : block) {
    s.line = line++;
    if (!s.compound()) continue;
    number_block(s.body, line);
    if (s.has_else) {
      ++line;
      number_block(s.orelse, line);
    }
    ++line;
  }
}

}  // namespace

std::string print(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Int:
      return std::to_string(e.value);
    case ExprKind::Null:
      return "null";
    case ExprKind::Var:
      return e.name;
    case ExprKind::Field:
      return e.name + "." + e.field;
    case ExprKind::Index:
      return e.name + "[" + print(e.args[0]) + "]";
    case ExprKind::Call: {
      std::string s = e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) s += (i ? ", " : "") + print(e.args[i]);
      return s + ")";
    }
    case ExprKind::NewObject:
      return "new " + e.name + "()";
    case ExprKind::NewArray:
      return "new int[" + print(e.args[0]) + "]";
    case ExprKind::Cast:
      return "(" + e.name + ") " + wrap(e.args[0], precedence(e.args[0]) < 10 || e.args[0].kind == ExprKind::Neg);
    case ExprKind::Len:
      return "len(" + print(e.args[0]) + ")";
    case ExprKind::InstanceOf:
      return wrap(e.args[0], precedence(e.args[0]) <= 1) + " instanceof " + e.name;
    case ExprKind::Neg:
      return "-" + wrap(e.args[0], precedence(e.args[0]) < 10);
    case ExprKind::Binary: {
      const int p = precedence(e);
      // Comparisons do not chain; arithmetic is left-associative.
      const bool left = p == 1 ? precedence(e.args[0]) <= 1 : precedence(e.args[0]) < p;
      const bool right = precedence(e.args[1]) <= p;
      return wrap(e.args[0], left) + " " + e.op + " " + wrap(e.args[1], right);
    }
  }
  return "?";
}

std::string print_header(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Decl:
      return to_string(s.type) + " " + s.name + (s.exprs.empty() ? "" : " = " + print(s.exprs[0])) + ";";
    case StmtKind::Assign:
      return s.name + " = " + print(s.exprs[0]) + ";";
    case StmtKind::FieldStore:
      return s.name + "." + s.field + " = " + print(s.exprs[0]) + ";";
    case StmtKind::ArrayStore:
      return s.name + "[" + print(s.exprs[0]) + "] = " + print(s.exprs[1]) + ";";
    case StmtKind::Call:
      return print(s.exprs[0]) + ";";
    case StmtKind::If:
      return "if (" + print(s.exprs[0]) + ") {";
    case StmtKind::While:
      return "while (" + print(s.exprs[0]) + ") {";
    case StmtKind::Return:
      return s.exprs.empty() ? "return;" : "return " + print(s.exprs[0]) + ";";
  }
  return "?";
}

std::string print_signature(const Method& m) {
  std::string s = to_string(m.ret) + " " + m.name + "(";
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    s += (i ? ", " : "") + to_string(m.params[i].type) + " " + m.params[i].name;
  }
  return s + ")";
}

std::string print(const Program& p) {
  std::ostringstream out;
  for (const ClassDecl& c : p.classes) {
    out << "class " << c.name;
    if (c.super != kRootClass) out << " extends " << c.super;
    out << " {\n";
    for (const auto& f : c.fields) out << "  int " << f << ";\n";
    out << "}\n";
  }
  for (const Method& m : p.methods) {
    out << print_signature(m) << " {\n";
    print_block(out, m.body, 1);
    out << "}\n";
  }
  return out.str();
}

void assign_lines(Program& p) {
  int line = 1;
  for (ClassDecl& c : p.classes) {
    c.line = line;
    line += 2 + static_cast<int>(c.fields.size());
  }
  for (Method& m : p.methods) {
    m.line = line++;
    number_block(m.body, line);
    ++line;
  }
}

}  // namespace ibpm::minilang
