// SPDX-License-Identifier: Apache-2.0
#include "ibpm/minilang/generator.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "ibpm/minilang/parser.hpp"
#include "ibpm/minilang/printer.hpp"

namespace ibpm::minilang {

namespace {

const std::vector<std::string> kTargetNames = {"compute", "update", "scan",  "total", "check",
                                               "merge",   "process", "count", "visit", "apply"};
const std::vector<std::string> kHelperNames = {"sum", "scale", "probe", "mix", "clip", "fold"};

struct Var {
  std::string name;
  std::string type;  // "int", "int[]" or a class name
  bool index = false;    // int known to be non-negative
  bool nonnull = false;  // reference known to be non-null
};

struct Sig {
  std::string name;
  std::vector<Var> params;
};

class Writer {
 public:
  Writer(Rng& rng, const GeneratorConfig& config) : rng_(rng), config_(config) {}

  std::string program() {
    make_classes();
    const std::size_t helpers = rng_.below(config_.max_helpers + 1);
    std::vector<std::string> names = kHelperNames;
    rng_.shuffle(names);
    std::vector<Sig> sigs;
    sigs.push_back({rng_.pick(kTargetNames), make_params(2, 4)});
    for (std::size_t h = 0; h < helpers; ++h) sigs.push_back({names[h], make_params(1, 3)});

    std::ostringstream out;
    for (const auto& c : classes_) {
      out << "class " << c.name;
      if (c.super != kRootClass) out << " extends " << c.super;
      out << " {\n";
      for (const auto& f : c.fields) out << "  int " << f << ";\n";
      out << "}\n";
    }
    for (std::size_t m = 0; m < sigs.size(); ++m) {
      callable_.assign(sigs.begin() + static_cast<std::ptrdiff_t>(m) + 1, sigs.end());
      const bool target = m == 0;
      const std::size_t lo = target ? config_.min_templates : 1;
      const std::size_t hi = target ? config_.max_templates : 3;
      out << method(sigs[m], static_cast<std::size_t>(rng_.range(static_cast<std::int64_t>(lo),
                                                                 static_cast<std::int64_t>(hi))),
                    target ? config_.max_nesting : 1);
    }
    return out.str();
  }

  std::string target_name() const { return target_; }

 private:
  struct Class {
    std::string name;
    std::string super;
    std::vector<std::string> fields;
  };

  void make_classes() {
    const std::size_t n = static_cast<std::size_t>(rng_.range(2, 3));
    std::size_t field = 0;
    for (std::size_t c = 0; c < n; ++c) {
      Class k;
      k.name = "C" + std::to_string(c);
      k.super = c == 0 ? kRootClass : classes_[rng_.below(c)].name;
      const std::size_t fields = c == 0 ? 2 : 1;
      for (std::size_t f = 0; f < fields; ++f) k.fields.push_back("f" + std::to_string(field++));
      classes_.push_back(std::move(k));
    }
  }

  const Class& cls(const std::string& name) const {
    return *std::find_if(classes_.begin(), classes_.end(), [&](const Class& c) { return c.name == name; });
  }

  std::vector<std::string> fields_of(const std::string& name) const {
    std::vector<std::string> out;
    for (std::string c = name; c != kRootClass; c = cls(c).super) {
      const auto& own = cls(c).fields;
      out.insert(out.end(), own.begin(), own.end());
    }
    return out;
  }

  bool extends(const std::string& sub, const std::string& of) const {
    for (std::string c = sub; c != kRootClass; c = cls(c).super) {
      if (c == of) return true;
    }
    return false;
  }

  std::vector<std::string> proper_subclasses(const std::string& of) const {
    std::vector<std::string> out;
    for (const auto& c : classes_) {
      if (c.name != of && extends(c.name, of)) out.push_back(c.name);
    }
    return out;
  }

  std::vector<Var> make_params(std::int64_t lo, std::int64_t hi) {
    struct Option {
      std::string name;
      std::string type;
    };
    std::vector<Option> options = {{"a", "int[]"}, {"b", "int[]"}, {"p", ""}, {"o", ""}, {"n", "int"}, {"k", "int"}};
    rng_.shuffle(options);
    const std::size_t count = static_cast<std::size_t>(rng_.range(lo, hi));
    std::vector<Var> params;
    for (std::size_t i = 0; i < count; ++i) {
      Var v{options[i].name, options[i].type};
      if (v.type.empty()) v.type = rng_.pick(classes_).name;
      v.index = v.type == "int";
      params.push_back(v);
    }
    std::sort(params.begin(), params.end(), [](const Var& x, const Var& y) { return x.name < y.name; });
    return params;
  }

  // ---- emission ----
  void emit(const std::string& line) { body_ << std::string(2 * indent_, ' ') << line << "\n"; }
  void open(const std::string& header) {
    emit(header + " {");
    ++indent_;
    scopes_.emplace_back();
  }
  void close(const std::string& trailer = "}") {
    scopes_.pop_back();
    --indent_;
    emit(trailer);
  }
  void declare(Var v) { scopes_.back().push_back(std::move(v)); }
  std::string fresh(const std::string& stem) { return stem + std::to_string(++fresh_); }

  std::vector<Var> vars(const std::function<bool(const Var&)>& keep) const {
    std::vector<Var> out;
    for (const auto& scope : scopes_) {
      for (const auto& v : scope) {
        if (keep(v)) out.push_back(v);
      }
    }
    return out;
  }
  std::vector<Var> arrays() const {
    return vars([](const Var& v) { return v.type == "int[]"; });
  }
  std::vector<Var> indices() const {
    return vars([](const Var& v) { return v.index; });
  }
  std::vector<Var> refs(bool nonnull) const {
    return vars([&](const Var& v) { return v.type != "int" && v.type != "int[]" && v.nonnull == nonnull; });
  }
  std::vector<Var> int_params() const {
    std::vector<Var> out;
    for (const auto& v : scopes_.front()) {
      if (v.type == "int") out.push_back(v);
    }
    return out;
  }

  std::string method(const Sig& sig, std::size_t templates, int nesting) {
    body_.str("");
    scopes_.assign(1, {});
    indent_ = 1;
    acc_ = fresh("s");
    if (target_.empty()) target_ = sig.name;
    std::string header = "int " + sig.name + "(";
    for (std::size_t k = 0; k < sig.params.size(); ++k) {
      header += (k ? ", " : "") + sig.params[k].type + " " + sig.params[k].name;
      declare(sig.params[k]);
    }
    header += ")";
    const auto ints = int_params();
    emit("int " + acc_ + " = " + (ints.empty() || rng_.chance(0.5) ? "0" : rng_.pick(ints).name) + ";");
    scopes_.emplace_back();
    for (std::size_t t = 0; t < templates; ++t) statement(nesting);
    emit("return " + acc_ + ";");
    return header + " {\n" + body_.str() + "}\n";
  }

  std::string field(const std::string& type) { return rng_.pick(fields_of(type)); }

  // One template, possibly nesting further templates up to `nesting` deep.
  void statement(int nesting) {
    struct Choice {
      double weight;
      std::function<void()> run;
    };
    std::vector<Choice> choices;
    const auto nullable = refs(false);
    const auto safe = refs(true);
    const auto arr = arrays();
    const auto idx = indices();
    const auto ints = int_params();
    const std::string s = acc_;
    auto nested = [&](double p) {
      if (nesting > 0 && rng_.chance(p)) statement(nesting - 1);
    };

    if (!nullable.empty()) {
      choices.push_back({3.0, [&] {
                           const Var p = rng_.pick(nullable);
                           const std::string f = field(p.type);
                           open("if (" + p.name + " != null)");
                           switch (rng_.below(3)) {
                             case 0:
                               emit(s + " = " + s + " + " + p.name + "." + f + ";");
                               break;
                             case 1:
                               emit(p.name + "." + f + " = " + s + ";");
                               break;
                             default:
                               emit(s + " = " + s + " - " + p.name + "." + f + " * 2;");
                               break;
                           }
                           nested(0.3);
                           close();
                         }});
    }
    if (!arr.empty() && !idx.empty()) {
      choices.push_back({3.0, [&] {
                           const Var a = rng_.pick(arr);
                           const Var k = rng_.pick(idx);
                           open("if (" + k.name + " < len(" + a.name + "))");
                           if (rng_.chance(0.5)) {
                             emit(s + " = " + s + " + " + a.name + "[" + k.name + "];");
                           } else {
                             emit(a.name + "[" + k.name + "] = " + s + ";");
                           }
                           nested(0.2);
                           close();
                         }});
    }
    if (!arr.empty()) {
      choices.push_back({3.0, [&] {
                           const Var a = rng_.pick(arr);
                           const std::string i = fresh("i");
                           emit("int " + i + " = 0;");
                           open("while (" + i + " < len(" + a.name + "))");
                           declare({i, "int", true, false});
                           if (rng_.chance(0.6)) {
                             emit(s + " = " + s + " + " + a.name + "[" + i + "];");
                           } else {
                             emit(a.name + "[" + i + "] = " + a.name + "[" + i + "] + " + s + ";");
                           }
                           nested(0.5);
                           emit(i + " = " + i + " + 1;");
                           close();
                         }});
    }
    if (!ints.empty()) {
      choices.push_back({1.0, [&] {
                           const Var n = rng_.pick(ints);
                           const std::string j = fresh("j");
                           emit("int " + j + " = 0;");
                           open("while (" + j + " < " + n.name + ")");
                           declare({j, "int", true, false});
                           emit(s + " = " + s + " + " + j + ";");
                           nested(0.5);
                           emit(j + " = " + j + " + 1;");
                           close();
                         }});
      choices.push_back({1.0, [&] {
                           const Var n = rng_.pick(ints);
                           const std::string c = fresh("c");
                           const std::string i = fresh("i");
                           emit("int[] " + c + " = new int[" + n.name + " + 1];");
                           emit("int " + i + " = 0;");
                           open("while (" + i + " <= " + n.name + ")");
                           emit(c + "[" + i + "] = " + s + " + " + i + ";");
                           emit(i + " = " + i + " + 1;");
                           close();
                           emit(s + " = " + s + " + " + c + "[" + n.name + "];");
                           declare({c, "int[]", false, true});
                         }});
    }
    std::vector<Var> castable;
    for (const auto& v : nullable) {
      if (!proper_subclasses(v.type).empty()) castable.push_back(v);
    }
    for (const auto& v : safe) {
      if (!proper_subclasses(v.type).empty()) castable.push_back(v);
    }
    if (!castable.empty()) {
      choices.push_back({1.5, [&] {
                           const Var p = rng_.pick(castable);
                           const std::string d = rng_.pick(proper_subclasses(p.type));
                           const std::string q = fresh("d");
                           open("if (" + p.name + " instanceof " + d + ")");
                           emit(d + " " + q + " = (" + d + ") " + p.name + ";");
                           emit(s + " = " + s + " + " + q + "." + field(d) + ";");
                           close();
                         }});
    }
    choices.push_back({1.0, [&] {
                         std::vector<std::string> terms = {std::to_string(rng_.range(1, 5))};
                         for (const auto& v : ints) terms.push_back(v.name + " * 2");
                         for (const auto& a : arr) terms.push_back("len(" + a.name + ")");
                         for (const auto& k : idx) terms.push_back(k.name + " - 1");
                         emit(s + " = " + s + " + " + rng_.pick(terms) + ";");
                       }});
    choices.push_back({1.0, [&] {
                         const std::string c = std::to_string(rng_.range(2, 12));
                         open("if (" + s + " > " + c + ")");
                         if (nesting > 0 && rng_.chance(0.5)) {
                           statement(nesting - 1);
                         } else {
                           emit(s + " = " + s + " - " + c + ";");
                         }
                         close("} else {");
                         ++indent_;
                         scopes_.emplace_back();
                         emit(s + " = " + s + " + 1;");
                         close();
                       }});
    choices.push_back({1.0, [&] {
                         const std::string c = rng_.pick(classes_).name;
                         const std::string r = fresh("r");
                         const std::string f = field(c);
                         emit(c + " " + r + " = new " + c + "();");
                         emit(r + "." + f + " = " + s + ";");
                         emit(s + " = " + s + " + " + r + "." + f + ";");
                         declare({r, c, false, true});
                       }});
    choices.push_back({1.0, [&] {
                         const std::string c = rng_.pick(classes_).name;
                         const std::string q = fresh("q");
                         emit(c + " " + q + " = null;");
                         open("if (" + s + " > " + std::to_string(rng_.range(1, 10)) + ")");
                         emit(q + " = new " + c + "();");
                         close();
                         declare({q, c, false, false});
                       }});
    if (!safe.empty()) {
      choices.push_back({1.0, [&] {
                           const Var r = rng_.pick(safe);
                           emit(s + " = " + s + " + " + r.name + "." + field(r.type) + ";");
                         }});
    }
    // Calls only where every parameter has an argument of a fitting type.
    std::vector<std::pair<Sig, std::vector<std::string>>> calls;
    for (const Sig& sig : callable_) {
      std::vector<std::string> args;
      for (const Var& p : sig.params) {
        const auto fits = vars([&](const Var& v) {
          if (p.type == "int") return v.index;
          if (p.type == "int[]") return v.type == p.type;
          return v.type != "int" && v.type != "int[]" && extends(v.type, p.type);
        });
        if (fits.empty()) break;
        args.push_back(rng_.pick(fits).name);
      }
      if (args.size() == sig.params.size()) calls.emplace_back(sig, args);
    }
    if (!calls.empty()) {
      choices.push_back({1.5, [&] {
                           const auto& [sig, args] = rng_.pick(calls);
                           std::string call = sig.name + "(";
                           for (std::size_t k = 0; k < args.size(); ++k) call += (k ? ", " : "") + args[k];
                           emit(s + " = " + s + " + " + call + ");");
                         }});
    }

    double total = 0;
    for (const auto& c : choices) total += c.weight;
    double x = rng_.uniform() * total;
    for (const auto& c : choices) {
      if ((x -= c.weight) < 0) {
        c.run();
        return;
      }
    }
    choices.back().run();
  }

  Rng& rng_;
  const GeneratorConfig& config_;
  std::vector<Class> classes_;
  std::vector<Sig> callable_;
  std::ostringstream body_;
  std::vector<std::vector<Var>> scopes_;
  int indent_ = 0;
  int fresh_ = 0;
  std::string acc_;
  std::string target_;
};

}  // namespace

GeneratedProgram generate_program(Rng& rng, const GeneratorConfig& config) {
  if (config.min_templates == 0 || config.min_templates > config.max_templates) {
    throw InvalidArgument("generator needs 0 < min_templates <= max_templates");
  }
  Writer writer(rng, config);
  const std::string text = writer.program();
  GeneratedProgram out;
  out.source = print(parse(text));
  out.program = parse(out.source);
  out.target = writer.target_name();
  return out;
}

}  // namespace ibpm::minilang
