// SPDX-License-Identifier: Apache-2.0
#include "ibpm/minilang/parser.hpp"

#include <map>
#include <optional>
#include <set>

namespace ibpm::minilang {

namespace {

// Static type of an expression; Null is assignable to any reference type.
struct Ty {
  enum class Kind { Int, Array, Class, Null, Void };
  Kind kind = Kind::Int;
  std::string cls;
};

Ty from_type(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Int:
      return {Ty::Kind::Int, {}};
    case Type::Kind::IntArray:
      return {Ty::Kind::Array, {}};
    case Type::Kind::Class:
      return {Ty::Kind::Class, t.cls};
    case Type::Kind::Void:
      return {Ty::Kind::Void, {}};
  }
  return {};
}

std::string describe(const Ty& t) {
  switch (t.kind) {
    case Ty::Kind::Int:
      return "int";
    case Ty::Kind::Array:
      return "int[]";
    case Ty::Kind::Class:
      return t.cls;
    case Ty::Kind::Null:
      return "null";
    case Ty::Kind::Void:
      return "void";
  }
  return "?";
}

struct Signature {
  Type ret;
  std::vector<Type> params;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program p;
    while (peek_is("class")) p.classes.push_back(class_decl());
    try {
      classes_ = ClassTable(p.classes);
    } catch (const InvalidArgument& e) {
      throw ParseError(1, 1, e.what());
    }
    for (const ClassDecl& c : p.classes) {
      std::set<std::string> seen;
      for (const auto& f : classes_.fields(c.name)) {
        if (!seen.insert(f).second) throw ParseError(c.line, 1, "field " + f + " declared twice in " + c.name);
      }
    }
    // Signatures first so that calls may refer to later methods.
    const std::size_t start = pos_;
    while (!at_end()) {
      const Token& t = cur();
      Type ret = type(true);
      const Token name = expect_ident();
      if (signatures_.count(name.text)) throw ParseError(name.line, name.column, "method " + name.text + " declared twice");
      Signature sig{ret, {}};
      expect("(");
      if (!peek_is(")")) {
        do {
          sig.params.push_back(type(false));
          expect_ident();
        } while (accept(","));
      }
      expect(")");
      skip_block();
      signatures_[name.text] = sig;
      (void)t;
    }
    pos_ = start;
    while (!at_end()) p.methods.push_back(method());
    return p;
  }

 private:
  // ---- token helpers ----
  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return cur().kind == TokenKind::End; }
  bool peek_is(const std::string& text) const {
    return cur().kind != TokenKind::End && cur().kind != TokenKind::Ident && cur().text == text;
  }
  bool accept(const std::string& text) {
    if (!peek_is(text)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(t.line, t.column, msg); }
  const Token& expect(const std::string& text) {
    if (!peek_is(text)) {
      fail(cur(), "expected '" + text + "' but found " + (at_end() ? "end of input" : "'" + cur().text + "'"));
    }
    return toks_[pos_++];
  }
  Token expect_ident() {
    if (cur().kind != TokenKind::Ident) {
      fail(cur(), "expected identifier but found " + (at_end() ? "end of input" : "'" + cur().text + "'"));
    }
    return toks_[pos_++];
  }
  void skip_block() {
    expect("{");
    int depth = 1;
    while (depth > 0) {
      if (at_end()) fail(cur(), "unterminated block");
      if (peek_is("{")) ++depth;
      if (peek_is("}")) --depth;
      ++pos_;
    }
  }

  // ---- declarations ----
  ClassDecl class_decl() {
    ClassDecl c;
    c.line = expect("class").line;
    c.name = expect_ident().text;
    c.super = accept("extends") ? expect_ident().text : kRootClass;
    expect("{");
    while (!accept("}")) {
      expect("int");
      c.fields.push_back(expect_ident().text);
      expect(";");
    }
    return c;
  }

  Type type(bool allow_void) {
    const Token& t = cur();
    if (accept("void")) {
      if (!allow_void) fail(t, "void is only allowed as a return type");
      return Type::none();
    }
    if (accept("int")) {
      if (accept("[")) {
        expect("]");
        return Type::array();
      }
      return Type::integer();
    }
    const Token name = expect_ident();
    if (!classes_.contains(name.text)) fail(name, "unknown class " + name.text);
    return Type::object(name.text);
  }

  Method method() {
    Method m;
    m.line = cur().line;
    m.ret = type(true);
    m.name = expect_ident().text;
    ret_ = m.ret;
    scopes_.assign(1, {});
    expect("(");
    if (!peek_is(")")) {
      do {
        Param p;
        p.type = type(false);
        const Token name = expect_ident();
        p.name = name.text;
        declare(name, p.type);
        m.params.push_back(p);
      } while (accept(","));
    }
    expect(")");
    m.body = block(false);
    return m;
  }

  // ---- scopes ----
  void declare(const Token& name, const Type& t) {
    if (classes_.contains(name.text)) fail(name, "variable " + name.text + " shadows a class name");
    for (const auto& scope : scopes_) {
      if (scope.count(name.text)) fail(name, "variable " + name.text + " already declared");
    }
    scopes_.back()[name.text] = t;
  }
  const Type& lookup(const Token& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name.text);
      if (f != it->end()) return f->second;
    }
    fail(name, "undeclared identifier " + name.text);
  }

  bool assignable(const Ty& to, const Ty& from) const {
    if (from.kind == Ty::Kind::Null) return to.kind == Ty::Kind::Array || to.kind == Ty::Kind::Class;
    if (to.kind != from.kind) return false;
    if (to.kind == Ty::Kind::Class) return classes_.is_subclass(from.cls, to.cls);
    return to.kind != Ty::Kind::Void;
  }
  void require(const Token& at, const Ty& to, const Ty& from, const std::string& what) const {
    if (!assignable(to, from)) fail(at, what + ": expected " + describe(to) + " but found " + describe(from));
  }

  // ---- statements ----
  static bool always_returns(const Stmt& s) {
    if (s.kind == StmtKind::Return) return true;
    if (s.kind != StmtKind::If || !s.has_else) return false;
    auto ends = [](const std::vector<Stmt>& b) { return !b.empty() && always_returns(b.back()); };
    return ends(s.body) && ends(s.orelse);
  }

  std::vector<Stmt> block(bool new_scope = true) {
    expect("{");
    if (new_scope) scopes_.emplace_back();
    std::vector<Stmt> out;
    bool returned = false;
    while (!accept("}")) {
      if (at_end()) fail(cur(), "unterminated block");
      if (returned) fail(cur(), "unreachable statement after return");
      out.push_back(statement());
      returned = always_returns(out.back());
    }
    if (new_scope) scopes_.pop_back();
    return out;
  }

  Stmt statement() {
    const Token start = cur();
    Stmt s;
    s.line = start.line;
    if (accept("if") || accept("while")) {
      s.kind = start.text == "if" ? StmtKind::If : StmtKind::While;
      expect("(");
      const Token at = cur();
      Expr cond;
      Ty t = expr(cond);
      require(at, {Ty::Kind::Int, {}}, t, "condition");
      s.exprs.push_back(std::move(cond));
      expect(")");
      s.body = block();
      if (s.kind == StmtKind::If && accept("else")) {
        s.has_else = true;
        s.orelse = block();
      }
      return s;
    }
    if (accept("return")) {
      s.kind = StmtKind::Return;
      if (!peek_is(";")) {
        const Token at = cur();
        Expr e;
        Ty t = expr(e);
        if (ret_.kind == Type::Kind::Void) fail(at, "void method returns a value");
        require(at, from_type(ret_), t, "return value");
        s.exprs.push_back(std::move(e));
      } else if (ret_.kind != Type::Kind::Void) {
        fail(start, "missing return value");
      }
      expect(";");
      return s;
    }
    const bool is_decl = peek_is("int") || (cur().kind == TokenKind::Ident && ahead(1).kind == TokenKind::Ident);
    if (is_decl) {
      s.kind = StmtKind::Decl;
      s.type = type(false);
      const Token name = expect_ident();
      s.name = name.text;
      if (accept("=")) {
        const Token at = cur();
        Expr e;
        Ty t = expr(e);
        require(at, from_type(s.type), t, "initialiser of " + s.name);
        s.exprs.push_back(std::move(e));
      }
      expect(";");
      declare(name, s.type);
      return s;
    }
    const Token name = expect_ident();
    if (peek_is("(")) {
      s.kind = StmtKind::Call;
      Expr call;
      call_expr(name, call);
      s.exprs.push_back(std::move(call));
      expect(";");
      return s;
    }
    const Type& vt = lookup(name);
    s.name = name.text;
    if (accept(".")) {
      s.kind = StmtKind::FieldStore;
      const Token field = expect_ident();
      check_field(name, vt, field);
      s.field = field.text;
      expect("=");
      const Token at = cur();
      Expr e;
      require(at, {Ty::Kind::Int, {}}, expr(e), "field value");
      s.exprs.push_back(std::move(e));
    } else if (accept("[")) {
      s.kind = StmtKind::ArrayStore;
      if (vt.kind != Type::Kind::IntArray) fail(name, name.text + " is not an array");
      Expr index, value;
      const Token at = cur();
      require(at, {Ty::Kind::Int, {}}, expr(index), "array index");
      expect("]");
      expect("=");
      const Token vat = cur();
      require(vat, {Ty::Kind::Int, {}}, expr(value), "array element");
      s.exprs.push_back(std::move(index));
      s.exprs.push_back(std::move(value));
    } else {
      s.kind = StmtKind::Assign;
      expect("=");
      const Token at = cur();
      Expr e;
      Ty t = expr(e);
      require(at, from_type(vt), t, "assignment to " + name.text);
      s.exprs.push_back(std::move(e));
    }
    expect(";");
    return s;
  }

  void check_field(const Token& var, const Type& vt, const Token& field) const {
    if (vt.kind != Type::Kind::Class) fail(var, var.text + " is not an object");
    if (!classes_.has_field(vt.cls, field.text)) fail(field, "class " + vt.cls + " has no field " + field.text);
  }

  // ---- expressions ----
  Ty expr(Expr& out) {
    const Token at = cur();
    Expr lhs;
    Ty lt = additive(lhs);
    static const std::set<std::string> cmp{"<", "<=", ">", ">=", "==", "!="};
    if (cur().kind == TokenKind::Symbol && cmp.count(cur().text)) {
      const std::string op = toks_[pos_++].text;
      const Token rat = cur();
      Expr rhs;
      Ty rt = additive(rhs);
      if (op == "==" || op == "!=") {
        const bool ok = (lt.kind == Ty::Kind::Int && rt.kind == Ty::Kind::Int) ||
                        (lt.kind != Ty::Kind::Int && rt.kind != Ty::Kind::Int && lt.kind != Ty::Kind::Void &&
                         rt.kind != Ty::Kind::Void);
        if (!ok) fail(rat, "cannot compare " + describe(lt) + " with " + describe(rt));
      } else {
        require(at, {Ty::Kind::Int, {}}, lt, "comparison");
        require(rat, {Ty::Kind::Int, {}}, rt, "comparison");
      }
      out = Expr::binary(op, std::move(lhs), std::move(rhs));
      return {Ty::Kind::Int, {}};
    }
    if (accept("instanceof")) {
      if (lt.kind != Ty::Kind::Class) fail(at, "instanceof needs an object");
      const Token cls = expect_ident();
      if (!classes_.contains(cls.text)) fail(cls, "unknown class " + cls.text);
      out = Expr::instance_of(std::move(lhs), cls.text);
      return {Ty::Kind::Int, {}};
    }
    out = std::move(lhs);
    return lt;
  }

  Ty additive(Expr& out) {
    const Token at = cur();
    Ty t = term(out);
    while (peek_is("+") || peek_is("-")) {
      const std::string op = toks_[pos_++].text;
      require(at, {Ty::Kind::Int, {}}, t, "arithmetic");
      const Token rat = cur();
      Expr rhs;
      require(rat, {Ty::Kind::Int, {}}, term(rhs), "arithmetic");
      out = Expr::binary(op, std::move(out), std::move(rhs));
    }
    return t;
  }

  Ty term(Expr& out) {
    const Token at = cur();
    Ty t = unary(out);
    while (peek_is("*")) {
      ++pos_;
      require(at, {Ty::Kind::Int, {}}, t, "arithmetic");
      const Token rat = cur();
      Expr rhs;
      require(rat, {Ty::Kind::Int, {}}, unary(rhs), "arithmetic");
      out = Expr::binary("*", std::move(out), std::move(rhs));
    }
    return t;
  }

  Ty unary(Expr& out) {
    const Token at = cur();
    if (accept("-")) {
      Expr inner;
      require(at, {Ty::Kind::Int, {}}, unary(inner), "negation");
      out = Expr::neg(std::move(inner));
      return {Ty::Kind::Int, {}};
    }
    // (C) operand is a cast when C names a class.
    if (peek_is("(") && ahead(1).kind == TokenKind::Ident && ahead(2).kind == TokenKind::Symbol &&
        ahead(2).text == ")" && classes_.contains(ahead(1).text)) {
      ++pos_;
      const std::string cls = toks_[pos_].text;
      pos_ += 2;
      const Token oat = cur();
      Expr inner;
      Ty t = unary(inner);
      if (t.kind != Ty::Kind::Class && t.kind != Ty::Kind::Null) fail(oat, "cast of a non-object");
      out = Expr::cast(cls, std::move(inner));
      return {Ty::Kind::Class, cls};
    }
    return primary(out);
  }

  Ty call_expr(const Token& name, Expr& out) {
    auto it = signatures_.find(name.text);
    if (it == signatures_.end()) fail(name, "unknown method " + name.text);
    expect("(");
    std::vector<Expr> args;
    std::vector<std::pair<Token, Ty>> types;
    if (!peek_is(")")) {
      do {
        const Token at = cur();
        Expr a;
        types.emplace_back(at, expr(a));
        args.push_back(std::move(a));
      } while (accept(","));
    }
    expect(")");
    const Signature& sig = it->second;
    if (args.size() != sig.params.size()) {
      fail(name, name.text + " expects " + std::to_string(sig.params.size()) + " arguments, got " +
                     std::to_string(args.size()));
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      require(types[i].first, from_type(sig.params[i]), types[i].second, "argument " + std::to_string(i + 1));
    }
    out = Expr::call(name.text, std::move(args));
    return from_type(sig.ret);
  }

  Ty primary(Expr& out) {
    const Token t = cur();
    if (t.kind == TokenKind::Number) {
      ++pos_;
      out = Expr::integer(std::stoll(t.text));
      return {Ty::Kind::Int, {}};
    }
    if (accept("null")) {
      out = Expr::null();
      return {Ty::Kind::Null, {}};
    }
    if (accept("new")) {
      if (accept("int")) {
        expect("[");
        const Token at = cur();
        Expr n;
        require(at, {Ty::Kind::Int, {}}, expr(n), "array length");
        expect("]");
        out = Expr::new_array(std::move(n));
        return {Ty::Kind::Array, {}};
      }
      const Token cls = expect_ident();
      if (!classes_.contains(cls.text)) fail(cls, "unknown class " + cls.text);
      expect("(");
      expect(")");
      out = Expr::new_object(cls.text);
      return {Ty::Kind::Class, cls.text};
    }
    if (accept("len")) {
      expect("(");
      const Token at = cur();
      Expr a;
      if (expr(a).kind != Ty::Kind::Array) fail(at, "len needs an array");
      expect(")");
      out = Expr::len(std::move(a));
      return {Ty::Kind::Int, {}};
    }
    if (accept("(")) {
      Ty inner = expr(out);
      expect(")");
      return inner;
    }
    const Token name = expect_ident();
    if (peek_is("(")) {
      Ty r = call_expr(name, out);
      if (r.kind == Ty::Kind::Void) fail(name, "void method " + name.text + " used as a value");
      return r;
    }
    const Type& vt = lookup(name);
    if (accept(".")) {
      const Token field = expect_ident();
      check_field(name, vt, field);
      out = Expr::field_of(name.text, field.text);
      return {Ty::Kind::Int, {}};
    }
    if (accept("[")) {
      if (vt.kind != Type::Kind::IntArray) fail(name, name.text + " is not an array");
      const Token at = cur();
      Expr i;
      require(at, {Ty::Kind::Int, {}}, expr(i), "array index");
      expect("]");
      out = Expr::index(name.text, std::move(i));
      return {Ty::Kind::Int, {}};
    }
    out = Expr::var(name.text);
    return from_type(vt);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ClassTable classes_;
  std::map<std::string, Signature> signatures_;
  std::vector<std::map<std::string, Type>> scopes_;
  Type ret_;
};

}  // namespace

Program parse(std::string_view source) {
  Parser p(lex(source));
  return p.program();
}

}  // namespace ibpm::minilang
