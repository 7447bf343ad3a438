// SPDX-License-Identifier: Apache-2.0
#include "ibpm/minilang/ast.hpp"

#include <algorithm>
#include <set>

namespace ibpm::minilang {

std::string to_string(BugKind kind) {
  switch (kind) {
    case BugKind::Clean:
      return "Clean";
    case BugKind::NullDeref:
      return "NullDeref";
    case BugKind::IndexOob:
      return "IndexOob";
    case BugKind::BadCast:
      return "BadCast";
  }
  return "?";
}

BugKind bug_kind_from_string(const std::string& s) {
  for (BugKind k : {BugKind::Clean, BugKind::NullDeref, BugKind::IndexOob, BugKind::BadCast}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown bug kind '" + s + "'");
}

std::string to_string(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Int:
      return "int";
    case Type::Kind::IntArray:
      return "int[]";
    case Type::Kind::Class:
      return t.cls;
    case Type::Kind::Void:
      return "void";
  }
  return "?";
}

Expr Expr::integer(std::int64_t v) {
  Expr e;
  e.kind = ExprKind::Int;
  e.value = v;
  return e;
}

Expr Expr::null() {
  Expr e;
  e.kind = ExprKind::Null;
  return e;
}

Expr Expr::var(std::string name) {
  Expr e;
  e.kind = ExprKind::Var;
  e.name = std::move(name);
  return e;
}

Expr Expr::field_of(std::string var, std::string field) {
  Expr e;
  e.kind = ExprKind::Field;
  e.name = std::move(var);
  e.field = std::move(field);
  return e;
}

Expr Expr::index(std::string array, Expr i) {
  Expr e;
  e.kind = ExprKind::Index;
  e.name = std::move(array);
  e.args.push_back(std::move(i));
  return e;
}

Expr Expr::call(std::string method, std::vector<Expr> args) {
  Expr e;
  e.kind = ExprKind::Call;
  e.name = std::move(method);
  e.args = std::move(args);
  return e;
}

Expr Expr::new_object(std::string cls) {
  Expr e;
  e.kind = ExprKind::NewObject;
  e.name = std::move(cls);
  return e;
}

Expr Expr::new_array(Expr length) {
  Expr e;
  e.kind = ExprKind::NewArray;
  e.args.push_back(std::move(length));
  return e;
}

Expr Expr::cast(std::string cls, Expr operand) {
  Expr e;
  e.kind = ExprKind::Cast;
  e.name = std::move(cls);
  e.args.push_back(std::move(operand));
  return e;
}

Expr Expr::len(Expr operand) {
  Expr e;
  e.kind = ExprKind::Len;
  e.args.push_back(std::move(operand));
  return e;
}

Expr Expr::instance_of(Expr operand, std::string cls) {
  Expr e;
  e.kind = ExprKind::InstanceOf;
  e.name = std::move(cls);
  e.args.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(std::string op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.op = std::move(op);
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

Expr Expr::neg(Expr operand) {
  Expr e;
  e.kind = ExprKind::Neg;
  e.args.push_back(std::move(operand));
  return e;
}

bool operator==(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.type == b.type && a.name == b.name && a.field == b.field && a.exprs == b.exprs &&
         a.body == b.body && a.orelse == b.orelse && a.has_else == b.has_else;
}

bool operator==(const Method& a, const Method& b) {
  return a.ret == b.ret && a.name == b.name && a.params == b.params && a.body == b.body;
}

bool operator==(const ClassDecl& a, const ClassDecl& b) {
  return a.name == b.name && a.super == b.super && a.fields == b.fields;
}

const Method* Program::find_method(const std::string& name) const {
  for (const Method& m : methods) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

Method* Program::find_method(const std::string& name) {
  for (Method& m : methods) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

ClassTable::ClassTable(const std::vector<ClassDecl>& classes) {
  super_[kRootClass] = "";
  own_fields_[kRootClass] = {};
  for (const ClassDecl& c : classes) {
    if (super_.count(c.name)) throw InvalidArgument("class " + c.name + " declared twice");
    super_[c.name] = c.super.empty() ? kRootClass : c.super;
    own_fields_[c.name] = c.fields;
  }
  for (const auto& [name, super] : super_) {
    if (name != kRootClass && !super_.count(super)) {
      throw InvalidArgument("class " + name + " extends unknown class " + super);
    }
  }
  for (const auto& [name, super] : super_) {
    std::set<std::string> seen;
    for (std::string c = name; !c.empty(); c = super_.at(c)) {
      if (!seen.insert(c).second) throw InvalidArgument("inheritance cycle through " + name);
    }
  }
}

bool ClassTable::contains(const std::string& cls) const { return super_.count(cls) > 0; }

std::vector<std::string> ClassTable::chain(const std::string& cls) const {
  if (!contains(cls)) throw InvalidArgument("unknown class " + cls);
  std::vector<std::string> out;
  for (std::string c = cls; !c.empty(); c = super_.at(c)) out.push_back(c);
  return out;
}

bool ClassTable::is_subclass(const std::string& cls, const std::string& of) const {
  const auto c = chain(cls);
  return std::find(c.begin(), c.end(), of) != c.end();
}

std::vector<std::string> ClassTable::fields(const std::string& cls) const {
  std::vector<std::string> out;
  for (const auto& c : chain(cls)) {
    const auto& own = own_fields_.at(c);
    out.insert(out.end(), own.begin(), own.end());
  }
  return out;
}

bool ClassTable::has_field(const std::string& cls, const std::string& field) const {
  const auto f = fields(cls);
  return std::find(f.begin(), f.end(), field) != f.end();
}

std::vector<std::string> ClassTable::classes() const {
  std::vector<std::string> out;
  for (const auto& [name, super] : super_) out.push_back(name);
  return out;
}

std::vector<std::string> ClassTable::subclasses(const std::string& cls) const {
  std::vector<std::string> out;
  for (const auto& [name, super] : super_) {
    if (is_subclass(name, cls)) out.push_back(name);
  }
  return out;
}

void collect_reads(const Expr& e, std::vector<std::string>& out) {
  auto add = [&](const std::string& v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  switch (e.kind) {
    case ExprKind::Var:
    case ExprKind::Field:
      add(e.name);
      break;
    case ExprKind::Index:
      add(e.name);
      break;
    default:
      break;
  }
  for (const Expr& a : e.args) collect_reads(a, out);
}

void collect_calls(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == ExprKind::Call) out.push_back(e.name);
  for (const Expr& a : e.args) collect_calls(a, out);
}

}  // namespace ibpm::minilang
