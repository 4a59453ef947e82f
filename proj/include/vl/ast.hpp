#pragma once

// Surface-language AST. Every node carries the source span it was parsed
// from. `if`/`&&`/`||` are parse-time sugar over two-branch case on 0/1,
// so they never appear here; list literals desugar to cons chains.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vl/version.hpp"

namespace vl {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 1;
  int col = 1;
};

enum class BinOpKind { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge };

inline const char* binop_name(BinOpKind k) {
  switch (k) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::Eq: return "==";
    case BinOpKind::Ne: return "/=";
    case BinOpKind::Lt: return "<";
    case BinOpKind::Le: return "<=";
    case BinOpKind::Gt: return ">";
    case BinOpKind::Ge: return ">=";
  }
  return "?";
}

struct SPattern;
using SPatternPtr = std::shared_ptr<const SPattern>;

struct SPattern {
  enum class Kind { Var, Int, Pair, Nil, Cons };
  Kind kind;
  Span span;
  std::string name;          // Var
  long value = 0;            // Int
  SPatternPtr first, second; // Pair / Cons

  static SPatternPtr var(std::string n, Span s = {}) {
    auto p = std::make_shared<SPattern>();
    p->kind = Kind::Var;
    p->name = std::move(n);
    p->span = s;
    return p;
  }
  static SPatternPtr integer(long v, Span s = {}) {
    auto p = std::make_shared<SPattern>();
    p->kind = Kind::Int;
    p->value = v;
    p->span = s;
    return p;
  }
  static SPatternPtr pair(SPatternPtr a, SPatternPtr b, Span s = {}) {
    auto p = std::make_shared<SPattern>();
    p->kind = Kind::Pair;
    p->first = std::move(a);
    p->second = std::move(b);
    p->span = s;
    return p;
  }
  static SPatternPtr nil(Span s = {}) {
    auto p = std::make_shared<SPattern>();
    p->kind = Kind::Nil;
    p->span = s;
    return p;
  }
  static SPatternPtr cons(SPatternPtr h, SPatternPtr t, Span s = {}) {
    auto p = std::make_shared<SPattern>();
    p->kind = Kind::Cons;
    p->first = std::move(h);
    p->second = std::move(t);
    p->span = s;
    return p;
  }
};

struct STerm;
using STermPtr = std::shared_ptr<const STerm>;

struct SBranch {
  SPatternPtr pattern;
  STermPtr body;
};

struct STerm {
  enum class Kind { Int, Var, Lam, App, Let, Pair, Nil, Cons, Case, VerOf, Unversion, BinOp };
  Kind kind;
  Span span;

  long value = 0;                 // Int
  std::string name;               // Var, Lam binder, Let binder
  STermPtr a, b;                  // Lam body (a); App fn/arg; Let bound/body;
                                  // Pair/Cons components; BinOp operands;
                                  // VerOf/Unversion operand (a)
  std::vector<SBranch> branches;  // Case (scrutinee in a)
  PartialLabel label;             // VerOf
  BinOpKind op = BinOpKind::Add;  // BinOp

  static STermPtr integer(long v, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::Int;
    t->value = v;
    t->span = s;
    return t;
  }
  static STermPtr var(std::string n, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::Var;
    t->name = std::move(n);
    t->span = s;
    return t;
  }
  static STermPtr lam(std::string binder, STermPtr body, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::Lam;
    t->name = std::move(binder);
    t->a = std::move(body);
    t->span = s;
    return t;
  }
  static STermPtr app(STermPtr fn, STermPtr arg, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::App;
    t->a = std::move(fn);
    t->b = std::move(arg);
    t->span = s;
    return t;
  }
  static STermPtr let(std::string binder, STermPtr bound, STermPtr body, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::Let;
    t->name = std::move(binder);
    t->a = std::move(bound);
    t->b = std::move(body);
    t->span = s;
    return t;
  }
  static STermPtr pair(STermPtr x, STermPtr y, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::Pair;
    t->a = std::move(x);
    t->b = std::move(y);
    t->span = s;
    return t;
  }
  static STermPtr nil(Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::Nil;
    t->span = s;
    return t;
  }
  static STermPtr cons(STermPtr h, STermPtr tl, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::Cons;
    t->a = std::move(h);
    t->b = std::move(tl);
    t->span = s;
    return t;
  }
  static STermPtr case_of(STermPtr scrutinee, std::vector<SBranch> branches, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::Case;
    t->a = std::move(scrutinee);
    t->branches = std::move(branches);
    t->span = s;
    return t;
  }
  static STermPtr ver_of(PartialLabel l, STermPtr body, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::VerOf;
    t->label = std::move(l);
    t->a = std::move(body);
    t->span = s;
    return t;
  }
  static STermPtr unversion(STermPtr body, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::Unversion;
    t->a = std::move(body);
    t->span = s;
    return t;
  }
  static STermPtr binop(BinOpKind op, STermPtr l, STermPtr r, Span s = {}) {
    auto t = std::make_shared<STerm>();
    t->kind = Kind::BinOp;
    t->op = op;
    t->a = std::move(l);
    t->b = std::move(r);
    t->span = s;
    return t;
  }
};

struct SurfaceDef {
  std::string symbol;
  STermPtr body;
  Span span;
};

struct SurfaceModule {
  ModuleName name;
  VersionString version;  // filled in by the repository loader
  std::vector<ModuleName> imports;
  std::vector<SurfaceDef> defs;

  const SurfaceDef* find(const std::string& symbol) const {
    for (const auto& d : defs)
      if (d.symbol == symbol) return &d;
    return nullptr;
  }
};

// Structural equality up to spans.
inline bool pattern_equal(const SPatternPtr& a, const SPatternPtr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case SPattern::Kind::Var: return a->name == b->name;
    case SPattern::Kind::Int: return a->value == b->value;
    case SPattern::Kind::Nil: return true;
    case SPattern::Kind::Pair:
    case SPattern::Kind::Cons:
      return pattern_equal(a->first, b->first) && pattern_equal(a->second, b->second);
  }
  return false;
}

inline bool term_equal(const STermPtr& a, const STermPtr& b) {
  if (a->kind != b->kind) return false;
  auto both = [&](const STermPtr& x, const STermPtr& y) {
    return (!x && !y) || (x && y && term_equal(x, y));
  };
  switch (a->kind) {
    case STerm::Kind::Int: return a->value == b->value;
    case STerm::Kind::Var: return a->name == b->name;
    case STerm::Kind::Nil: return true;
    case STerm::Kind::Lam:
    case STerm::Kind::Let:
      return a->name == b->name && both(a->a, b->a) && both(a->b, b->b);
    case STerm::Kind::BinOp:
      return a->op == b->op && both(a->a, b->a) && both(a->b, b->b);
    case STerm::Kind::VerOf:
      return a->label == b->label && both(a->a, b->a);
    case STerm::Kind::Case: {
      if (!both(a->a, b->a) || a->branches.size() != b->branches.size()) return false;
      for (std::size_t i = 0; i < a->branches.size(); ++i) {
        if (!pattern_equal(a->branches[i].pattern, b->branches[i].pattern) ||
            !term_equal(a->branches[i].body, b->branches[i].body))
          return false;
      }
      return true;
    }
    default:
      return both(a->a, b->a) && both(a->b, b->b);
  }
}

// Deterministic, re-parseable rendering. Fully parenthesized except for
// application chains, so parse . print . parse is a fixpoint.
inline std::string pattern_string(const SPatternPtr& p) {
  switch (p->kind) {
    case SPattern::Kind::Var: return p->name;
    case SPattern::Kind::Int: return std::to_string(p->value);
    case SPattern::Kind::Nil: return "[]";
    case SPattern::Kind::Pair:
      return "(" + pattern_string(p->first) + ", " + pattern_string(p->second) + ")";
    case SPattern::Kind::Cons:
      return "(" + pattern_string(p->first) + " : " + pattern_string(p->second) + ")";
  }
  return "?";
}

inline std::string term_string(const STermPtr& t) {
  auto atom = [](const STermPtr& u, const std::string& s) {
    switch (u->kind) {
      case STerm::Kind::Int:
      case STerm::Kind::Var:
      case STerm::Kind::Nil:
      case STerm::Kind::Pair:
        return s;
      default:
        return "(" + s + ")";
    }
  };
  switch (t->kind) {
    case STerm::Kind::Int: return std::to_string(t->value);
    case STerm::Kind::Var: return t->name;
    case STerm::Kind::Nil: return "[]";
    case STerm::Kind::Lam: return "\\" + t->name + " -> " + term_string(t->a);
    case STerm::Kind::App: {
      std::string fn = term_string(t->a);
      if (t->a->kind != STerm::Kind::App) fn = atom(t->a, fn);
      return fn + " " + atom(t->b, term_string(t->b));
    }
    case STerm::Kind::Let:
      return "let " + t->name + " = " + term_string(t->a) + " in " + term_string(t->b);
    case STerm::Kind::Pair:
      return "(" + term_string(t->a) + ", " + term_string(t->b) + ")";
    case STerm::Kind::Cons:
      return atom(t->a, term_string(t->a)) + " : " + atom(t->b, term_string(t->b));
    case STerm::Kind::Case: {
      std::string out = "case " + term_string(t->a) + " of { ";
      for (std::size_t i = 0; i < t->branches.size(); ++i) {
        if (i) out += "; ";
        out += pattern_string(t->branches[i].pattern) + " -> " + term_string(t->branches[i].body);
      }
      return out + " }";
    }
    case STerm::Kind::VerOf: {
      std::string out = "ver [";
      bool first = true;
      for (const auto& [m, v] : t->label) {
        if (!first) out += ", ";
        out += m + " = " + v;
        first = false;
      }
      return out + "] of " + atom(t->a, term_string(t->a));
    }
    case STerm::Kind::Unversion:
      return "unversion " + atom(t->a, term_string(t->a));
    case STerm::Kind::BinOp:
      return atom(t->a, term_string(t->a)) + " " + binop_name(t->op) + " " +
             atom(t->b, term_string(t->b));
  }
  return "?";
}

}  // namespace vl
