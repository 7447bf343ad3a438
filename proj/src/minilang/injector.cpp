// SPDX-License-Identifier: Apache-2.0
#include "ibpm/minilang/injector.hpp"

#include <algorithm>
#include <set>

#include "ibpm/minilang/parser.hpp"
#include "ibpm/minilang/printer.hpp"

namespace ibpm::minilang {

namespace {

bool is_var_null_pair(const Expr& a, const Expr& b) { return a.kind == ExprKind::Var && b.kind == ExprKind::Null; }

bool eligible(const Stmt& s, BugKind kind) {
  if (!s.compound() || s.exprs.empty()) return false;
  const Expr& c = s.exprs[0];
  const bool plain_if = s.kind == StmtKind::If && !s.has_else;
  switch (kind) {
    case BugKind::NullDeref:
      return plain_if && c.kind == ExprKind::Binary && c.op == "!=" &&
             (is_var_null_pair(c.args[0], c.args[1]) || is_var_null_pair(c.args[1], c.args[0]));
    case BugKind::IndexOob:
      if (c.kind != ExprKind::Binary || c.op != "<") return false;
      return s.kind == StmtKind::While || (plain_if && c.args[1].kind == ExprKind::Len);
    case BugKind::BadCast:
      return plain_if && c.kind == ExprKind::InstanceOf;
    case BugKind::Clean:
      return false;
  }
  return false;
}

// Applies the mutation to the `target`-th statement (pre-order) of the block
// tree. Returns true once applied.
bool mutate(std::vector<Stmt>& block, std::size_t& counter, std::size_t target) {
  for (std::size_t k = 0; k < block.size(); ++k) {
    Stmt& s = block[k];
    if (counter++ == target) {
      if (s.kind == StmtKind::While) {
        s.exprs[0].op = "<=";
      } else {
        std::vector<Stmt> body = std::move(s.body);
        block.erase(block.begin() + static_cast<std::ptrdiff_t>(k));
        block.insert(block.begin() + static_cast<std::ptrdiff_t>(k), body.begin(), body.end());
      }
      return true;
    }
    if (mutate(s.body, counter, target) || mutate(s.orelse, counter, target)) return true;
  }
  return false;
}

// Pre-order index -> statement, for the method body.
std::vector<const Stmt*> flatten(const Method& m) {
  std::vector<const Stmt*> out;
  for_each_stmt(m.body, [&](const Stmt& s) { out.push_back(&s); });
  return out;
}

}  // namespace

Injection inject_bug(const Program& program, const ClassTable& classes, const std::string& method, BugKind kind,
                     Rng& rng, std::size_t attempts_per_site) {
  if (kind == BugKind::Clean) throw InvalidArgument("cannot inject a Clean bug");
  const Method* m = program.find_method(method);
  if (!m) throw InvalidArgument("no method named " + method);

  const auto stmts = flatten(*m);
  std::vector<std::size_t> sites;
  for (std::size_t k = 0; k < stmts.size(); ++k) {
    if (eligible(*stmts[k], kind)) sites.push_back(k);
  }
  rng.shuffle(sites);

  for (std::size_t site : sites) {
    Program mutant = program;
    std::size_t counter = 0;
    mutate(mutant.find_method(method)->body, counter, site);
    try {
      mutant = parse(print(mutant));
    } catch (const ParseError&) {
      continue;  // e.g. the spliced body redeclares a later variable
    }

    // Lines the mutation touched: the spliced statements, or the whole loop.
    std::set<int> region;
    {
      Program numbered = program;
      assign_lines(numbered);
      const Stmt* original = flatten(*numbered.find_method(method))[site];
      const auto mutant_stmts = flatten(*mutant.find_method(method));
      std::vector<const Stmt*> touched;
      if (original->kind == StmtKind::While) {
        touched.push_back(mutant_stmts[site]);
      } else {
        std::size_t n = 0;
        for_each_stmt(original->body, [&](const Stmt&) { ++n; });
        for (std::size_t k = site; k < site + n; ++k) touched.push_back(mutant_stmts[k]);
      }
      for (const Stmt* s : touched) {
        region.insert(s->line);
        for_each_stmt(s->body, [&](const Stmt& t) { region.insert(t.line); });
        for_each_stmt(s->orelse, [&](const Stmt& t) { region.insert(t.line); });
      }
    }

    for (std::size_t attempt = 0; attempt < attempts_per_site; ++attempt) {
      std::vector<Input> inputs = sample_inputs(*m, classes, rng);
      const Outcome before = interpret(program, classes, method, inputs);
      if (!before.ok()) continue;
      const Outcome after = interpret(mutant, classes, method, inputs);
      if (after.faulted(kind) && region.count(after.line)) {
        return Injection{std::move(mutant), after.line, kind, std::move(inputs)};
      }
    }
  }
  throw NotInjectable("no " + to_string(kind) + " site in " + method + " yields a confirmed fault (" +
                      std::to_string(sites.size()) + " candidate sites)");
}

}  // namespace ibpm::minilang
