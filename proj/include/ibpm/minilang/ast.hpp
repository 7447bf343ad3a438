// SPDX-License-Identifier: Apache-2.0
//
// MiniLang: classes with int fields and single inheritance, methods over
// ints, int arrays and class references, structured control flow. See
// docs/minilang.md for the grammar.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ibpm/error.hpp"

namespace ibpm::minilang {

inline constexpr const char* kRootClass = "Object";

enum class BugKind { Clean, NullDeref, IndexOob, BadCast };

std::string to_string(BugKind kind);
BugKind bug_kind_from_string(const std::string& s);

struct Type {
  enum class Kind { Int, IntArray, Class, Void };
  Kind kind = Kind::Int;
  std::string cls;  // Class only

  static Type integer() { return {Kind::Int, {}}; }
  static Type array() { return {Kind::IntArray, {}}; }
  static Type object(std::string c) { return {Kind::Class, std::move(c)}; }
  static Type none() { return {Kind::Void, {}}; }

  bool is_ref() const { return kind == Kind::IntArray || kind == Kind::Class; }
  friend bool operator==(const Type&, const Type&) = default;
};

std::string to_string(const Type& t);

enum class ExprKind { Int, Null, Var, Field, Index, Call, NewObject, NewArray, Cast, Len, InstanceOf, Binary, Neg };

// Field, Index, Call, NewObject, Cast and InstanceOf keep their identifier in
// `name`: the dereferenced variable, the array variable, the callee, or the
// class.
struct Expr {
  ExprKind kind = ExprKind::Int;
  std::int64_t value = 0;
  std::string name;
  std::string field;
  std::string op;
  std::vector<Expr> args;

  static Expr integer(std::int64_t v);
  static Expr null();
  static Expr var(std::string name);
  static Expr field_of(std::string var, std::string field);
  static Expr index(std::string array, Expr i);
  static Expr call(std::string method, std::vector<Expr> args);
  static Expr new_object(std::string cls);
  static Expr new_array(Expr length);
  static Expr cast(std::string cls, Expr operand);
  static Expr len(Expr operand);
  static Expr instance_of(Expr operand, std::string cls);
  static Expr binary(std::string op, Expr lhs, Expr rhs);
  static Expr neg(Expr operand);

  friend bool operator==(const Expr&, const Expr&) = default;
};

enum class StmtKind { Decl, Assign, FieldStore, ArrayStore, Call, If, While, Return };

// exprs holds: Decl [init?], Assign [value], FieldStore [value],
// ArrayStore [index, value], Call [call], If/While [cond], Return [value?].
struct Stmt {
  StmtKind kind = StmtKind::Assign;
  int line = 0;
  Type type;          // Decl
  std::string name;   // declared/assigned variable, or the stored-to base
  std::string field;  // FieldStore
  std::vector<Expr> exprs;
  std::vector<Stmt> body;
  std::vector<Stmt> orelse;
  bool has_else = false;

  bool compound() const { return kind == StmtKind::If || kind == StmtKind::While; }
  // Source positions are not part of the comparison.
  friend bool operator==(const Stmt& a, const Stmt& b);
};

struct Param {
  Type type;
  std::string name;
  friend bool operator==(const Param&, const Param&) = default;
};

struct Method {
  Type ret;
  std::string name;
  std::vector<Param> params;
  std::vector<Stmt> body;
  int line = 0;
  friend bool operator==(const Method& a, const Method& b);
};

struct ClassDecl {
  std::string name;
  std::string super;  // kRootClass when no extends clause
  std::vector<std::string> fields;
  int line = 0;
  friend bool operator==(const ClassDecl& a, const ClassDecl& b);
};

struct Program {
  std::vector<ClassDecl> classes;
  std::vector<Method> methods;

  const Method* find_method(const std::string& name) const;
  Method* find_method(const std::string& name);
  friend bool operator==(const Program&, const Program&) = default;
};

// Supertype chains for the classes of a program.
class ClassTable {
 public:
  ClassTable() = default;
  // Throws InvalidArgument on unknown supers or cycles.
  explicit ClassTable(const std::vector<ClassDecl>& classes);

  bool contains(const std::string& cls) const;
  // cls, its super, ..., kRootClass.
  std::vector<std::string> chain(const std::string& cls) const;
  bool is_subclass(const std::string& cls, const std::string& of) const;
  // Own and inherited int fields.
  std::vector<std::string> fields(const std::string& cls) const;
  bool has_field(const std::string& cls, const std::string& field) const;
  std::vector<std::string> classes() const;
  std::vector<std::string> subclasses(const std::string& cls) const;

 private:
  std::map<std::string, std::string> super_;
  std::map<std::string, std::vector<std::string>> own_fields_;
};

// Visits every statement in execution-order nesting (pre-order).
template <typename F>
void for_each_stmt(const std::vector<Stmt>& block, F&& f) {
  for (const Stmt& s : block) {
    f(s);
    for_each_stmt(s.body, f);
    for_each_stmt(s.orelse, f);
  }
}

template <typename F>
void for_each_stmt(std::vector<Stmt>& block, F&& f) {
  for (Stmt& s : block) {
    f(s);
    for_each_stmt(s.body, f);
    for_each_stmt(s.orelse, f);
  }
}

// Variables read by an expression, in first-occurrence order.
void collect_reads(const Expr& e, std::vector<std::string>& out);
// Names of methods called by an expression.
void collect_calls(const Expr& e, std::vector<std::string>& out);

}  // namespace ibpm::minilang
