// SPDX-License-Identifier: Apache-2.0
#include "ibpm/minilang/interpreter.hpp"

#include <map>
#include <sstream>

namespace ibpm::minilang {

namespace {

struct Value {
  enum class Kind { Int, Null, Object, Array };
  Kind kind = Kind::Int;
  std::int64_t i = 0;   // Int
  std::size_t ref = 0;  // heap slot for Object / Array
};

struct Object {
  std::string cls;
  std::map<std::string, std::int64_t> fields;
};

struct Fault {
  BugKind kind;
  int line;
};
struct OutOfSteps {};
struct Returned {
  Value value;
};

std::int64_t wrap(std::uint64_t v) { return static_cast<std::int64_t>(v); }

class Machine {
 public:
  Machine(const Program& p, const ClassTable& c, std::size_t budget) : program_(p), classes_(c), budget_(budget) {}

  Value load(const Input& in) {
    switch (in.kind) {
      case Input::Kind::Int:
        return {Value::Kind::Int, in.value, 0};
      case Input::Kind::Null:
        return {Value::Kind::Null, 0, 0};
      case Input::Kind::Object: {
        Object o{in.cls, {}};
        const auto fields = classes_.fields(in.cls);
        for (std::size_t k = 0; k < fields.size(); ++k) o.fields[fields[k]] = k < in.data.size() ? in.data[k] : 0;
        objects_.push_back(std::move(o));
        return {Value::Kind::Object, 0, objects_.size() - 1};
      }
      case Input::Kind::Array:
        arrays_.push_back(in.data);
        return {Value::Kind::Array, 0, arrays_.size() - 1};
    }
    return {};
  }

  Value call(const Method& m, const std::vector<Value>& args) {
    if (++depth_ > 256) throw OutOfSteps{};
    frames_.emplace_back();
    frames_.back().emplace_back();
    for (std::size_t k = 0; k < m.params.size(); ++k) frames_.back().back()[m.params[k].name] = args[k];
    Value result = default_value(m.ret);
    try {
      run(m.body);
    } catch (Returned& r) {
      result = r.value;
    }
    frames_.pop_back();
    --depth_;
    return result;
  }

 private:
  using Scope = std::map<std::string, Value>;

  static Value default_value(const Type& t) {
    return t.kind == Type::Kind::Int ? Value{Value::Kind::Int, 0, 0} : Value{Value::Kind::Null, 0, 0};
  }

  Value& var(const std::string& name) {
    auto& scopes = frames_.back();
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    throw InvalidArgument("interpreter: unbound variable " + name);
  }

  Object& object(const Value& v) {
    if (v.kind != Value::Kind::Object) throw Fault{BugKind::NullDeref, line_};
    return objects_[v.ref];
  }

  std::vector<std::int64_t>& array(const Value& v) {
    if (v.kind != Value::Kind::Array) throw Fault{BugKind::NullDeref, line_};
    return arrays_[v.ref];
  }

  std::int64_t& element(const std::string& name, std::int64_t index) {
    auto& a = array(var(name));
    if (index < 0 || static_cast<std::uint64_t>(index) >= a.size()) throw Fault{BugKind::IndexOob, line_};
    return a[static_cast<std::size_t>(index)];
  }

  std::int64_t integer(const Expr& e) { return eval(e).i; }

  Value eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Int:
        return {Value::Kind::Int, e.value, 0};
      case ExprKind::Null:
        return {Value::Kind::Null, 0, 0};
      case ExprKind::Var:
        return var(e.name);
      case ExprKind::Field:
        return {Value::Kind::Int, object(var(e.name)).fields.at(e.field), 0};
      case ExprKind::Index: {
        const std::int64_t i = integer(e.args[0]);
        return {Value::Kind::Int, element(e.name, i), 0};
      }
      case ExprKind::Call: {
        const Method* m = program_.find_method(e.name);
        if (!m) throw InvalidArgument("interpreter: unknown method " + e.name);
        std::vector<Value> args;
        for (const Expr& a : e.args) args.push_back(eval(a));
        const int saved = line_;
        Value v = call(*m, args);
        line_ = saved;
        return v;
      }
      case ExprKind::NewObject: {
        Object o{e.name, {}};
        for (const auto& f : classes_.fields(e.name)) o.fields[f] = 0;
        objects_.push_back(std::move(o));
        return {Value::Kind::Object, 0, objects_.size() - 1};
      }
      case ExprKind::NewArray: {
        const std::int64_t n = integer(e.args[0]);
        if (n < 0 || n > 1'000'000) throw Fault{BugKind::IndexOob, line_};
        arrays_.emplace_back(static_cast<std::size_t>(n), 0);
        return {Value::Kind::Array, 0, arrays_.size() - 1};
      }
      case ExprKind::Cast: {
        Value v = eval(e.args[0]);
        if (v.kind == Value::Kind::Object && !classes_.is_subclass(objects_[v.ref].cls, e.name)) {
          throw Fault{BugKind::BadCast, line_};
        }
        return v;
      }
      case ExprKind::Len:
        return {Value::Kind::Int, static_cast<std::int64_t>(array(eval(e.args[0])).size()), 0};
      case ExprKind::InstanceOf: {
        const Value v = eval(e.args[0]);
        const bool yes = v.kind == Value::Kind::Object && classes_.is_subclass(objects_[v.ref].cls, e.name);
        return {Value::Kind::Int, yes ? 1 : 0, 0};
      }
      case ExprKind::Binary:
        return binary(e);
      case ExprKind::Neg:
        return {Value::Kind::Int, wrap(0 - static_cast<std::uint64_t>(integer(e.args[0]))), 0};
    }
    return {};
  }

  Value binary(const Expr& e) {
    const Value a = eval(e.args[0]);
    const Value b = eval(e.args[1]);
    auto boolean = [](bool v) { return Value{Value::Kind::Int, v ? 1 : 0, 0}; };
    if (e.op == "==" || e.op == "!=") {
      bool same;
      if (a.kind == Value::Kind::Int) {
        same = a.i == b.i;
      } else {
        same = a.kind == b.kind && (a.kind == Value::Kind::Null || a.ref == b.ref);
      }
      return boolean(e.op == "==" ? same : !same);
    }
    const auto x = static_cast<std::uint64_t>(a.i);
    const auto y = static_cast<std::uint64_t>(b.i);
    if (e.op == "+") return {Value::Kind::Int, wrap(x + y), 0};
    if (e.op == "-") return {Value::Kind::Int, wrap(x - y), 0};
    if (e.op == "*") return {Value::Kind::Int, wrap(x * y), 0};
    if (e.op == "<") return boolean(a.i < b.i);
    if (e.op == "<=") return boolean(a.i <= b.i);
    if (e.op == ">") return boolean(a.i > b.i);
    if (e.op == ">=") return boolean(a.i >= b.i);
    throw InvalidArgument("interpreter: unknown operator " + e.op);
  }

  void step(const Stmt& s) {
    line_ = s.line;
    if (steps_++ >= budget_) throw OutOfSteps{};
  }

  void run(const std::vector<Stmt>& block) {
    frames_.back().emplace_back();
    for (const Stmt& s : block) execute(s);
    frames_.back().pop_back();
  }

  void execute(const Stmt& s) {
    step(s);
    switch (s.kind) {
      case StmtKind::Decl: {
        Value v = s.exprs.empty() ? default_value(s.type) : eval(s.exprs[0]);
        frames_.back().back()[s.name] = v;
        break;
      }
      case StmtKind::Assign: {
        Value v = eval(s.exprs[0]);
        var(s.name) = v;
        break;
      }
      case StmtKind::FieldStore: {
        Object& o = object(var(s.name));
        const std::int64_t v = integer(s.exprs[0]);
        o.fields.at(s.field) = v;
        break;
      }
      case StmtKind::ArrayStore: {
        array(var(s.name));
        const std::int64_t i = integer(s.exprs[0]);
        const std::int64_t v = integer(s.exprs[1]);
        element(s.name, i) = v;
        break;
      }
      case StmtKind::Call:
        eval(s.exprs[0]);
        break;
      case StmtKind::If:
        if (integer(s.exprs[0]) != 0) {
          run(s.body);
        } else if (s.has_else) {
          run(s.orelse);
        }
        break;
      case StmtKind::While:
        while (integer(s.exprs[0]) != 0) {
          run(s.body);
          step(s);
        }
        break;
      case StmtKind::Return:
        throw Returned{s.exprs.empty() ? Value{} : eval(s.exprs[0])};
    }
  }

  const Program& program_;
  const ClassTable& classes_;
  std::size_t budget_;
  std::size_t steps_ = 0;
  int depth_ = 0;
  int line_ = 0;
  std::vector<std::vector<Scope>> frames_;
  std::vector<Object> objects_;
  std::vector<std::vector<std::int64_t>> arrays_;
};

}  // namespace

std::string to_string(const Input& in) {
  std::ostringstream out;
  switch (in.kind) {
    case Input::Kind::Int:
      out << in.value;
      break;
    case Input::Kind::Null:
      out << "null";
      break;
    case Input::Kind::Object:
    case Input::Kind::Array: {
      if (in.kind == Input::Kind::Object) out << in.cls;
      out << "[";
      for (std::size_t k = 0; k < in.data.size(); ++k) out << (k ? "," : "") << in.data[k];
      out << "]";
      break;
    }
  }
  return out.str();
}

std::string to_string(const Outcome& o) {
  switch (o.status) {
    case Outcome::Status::Ok:
      return "ok " + std::to_string(o.result);
    case Outcome::Status::Fault:
      return "fault " + to_string(o.fault) + " at line " + std::to_string(o.line);
    case Outcome::Status::Timeout:
      return "timeout";
  }
  return "?";
}

Outcome interpret(const Program& program, const ClassTable& classes, const std::string& method,
                  const std::vector<Input>& inputs, std::size_t step_budget) {
  const Method* m = program.find_method(method);
  if (!m) throw InvalidArgument("no method named " + method);
  if (inputs.size() != m->params.size()) {
    throw InvalidArgument(method + " takes " + std::to_string(m->params.size()) + " arguments, got " +
                          std::to_string(inputs.size()));
  }
  Machine machine(program, classes, step_budget);
  std::vector<Value> args;
  for (const Input& in : inputs) args.push_back(machine.load(in));
  Outcome out;
  try {
    const Value v = machine.call(*m, args);
    out.result = v.kind == Value::Kind::Int ? v.i : 0;
  } catch (const Fault& f) {
    out.status = Outcome::Status::Fault;
    out.fault = f.kind;
    out.line = f.line;
  } catch (const OutOfSteps&) {
    out.status = Outcome::Status::Timeout;
  }
  return out;
}

std::vector<Input> sample_inputs(const Method& method, const ClassTable& classes, Rng& rng) {
  std::vector<Input> out;
  for (const Param& p : method.params) {
    switch (p.type.kind) {
      case Type::Kind::Int:
        out.push_back(Input::integer(rng.range(0, 7)));
        break;
      case Type::Kind::IntArray: {
        std::vector<std::int64_t> data(static_cast<std::size_t>(rng.range(0, 6)));
        for (auto& x : data) x = rng.range(0, 9);
        out.push_back(Input::array(std::move(data)));
        break;
      }
      case Type::Kind::Class: {
        if (rng.chance(0.3)) {
          out.push_back(Input::null());
          break;
        }
        const std::string cls = rng.pick(classes.subclasses(p.type.cls));
        std::vector<std::int64_t> fields(classes.fields(cls).size());
        for (auto& x : fields) x = rng.range(0, 9);
        out.push_back(Input::object(cls, std::move(fields)));
        break;
      }
      case Type::Kind::Void:
        break;
    }
  }
  return out;
}

}  // namespace ibpm::minilang
