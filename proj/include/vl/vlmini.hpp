#pragma once

// The VLMini intermediate representation: terms with promotions and
// promoted patterns, types graded by version resources, kinds separating
// type from resource variables, ordered typing contexts, dependency and
// type constraints, and substitutions.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vl/ast.hpp"
#include "vl/version.hpp"

namespace vl {

struct LinearClash : Error {
  using Error::Error;
};
struct TypeMismatch : Error {
  using Error::Error;
};
struct LinearInScaledContext : Error {
  using Error::Error;
};
struct KindError : Error {
  using Error::Error;
};

enum class TyKind { Type, Labels };

// ---------------------------------------------------------------------------
// Types: Int | alpha | A -> B | Box_r A | (A, B) | [A]
// ---------------------------------------------------------------------------

struct MTy;
using MTyPtr = std::shared_ptr<const MTy>;

struct MTy {
  enum class K { Int, Var, Arrow, Box, Pair, List };
  K k;
  std::string var;  // Var
  MTyPtr a, b;      // Arrow domain/codomain, Box body (a), Pair components, List element (a)
  Resource res = Resource::unit();  // Box

  static MTyPtr integer() {
    static MTyPtr t = std::make_shared<MTy>(MTy{K::Int});
    return t;
  }
  static MTyPtr tyvar(std::string n) {
    auto t = std::make_shared<MTy>(MTy{K::Var});
    t->var = std::move(n);
    return MTyPtr(t);
  }
  static MTyPtr arrow(MTyPtr dom, MTyPtr cod) {
    auto t = std::make_shared<MTy>(MTy{K::Arrow});
    t->a = std::move(dom);
    t->b = std::move(cod);
    return t;
  }
  static MTyPtr box(Resource r, MTyPtr body) {
    auto t = std::make_shared<MTy>(MTy{K::Box});
    t->res = std::move(r);
    t->a = std::move(body);
    return t;
  }
  static MTyPtr pair(MTyPtr x, MTyPtr y) {
    auto t = std::make_shared<MTy>(MTy{K::Pair});
    t->a = std::move(x);
    t->b = std::move(y);
    return t;
  }
  static MTyPtr list(MTyPtr elem) {
    auto t = std::make_shared<MTy>(MTy{K::List});
    t->a = std::move(elem);
    return t;
  }
};

inline bool ty_equal(const MTyPtr& x, const MTyPtr& y) {
  if (x->k != y->k) return false;
  switch (x->k) {
    case MTy::K::Int: return true;
    case MTy::K::Var: return x->var == y->var;
    case MTy::K::Arrow:
    case MTy::K::Pair:
      return ty_equal(x->a, y->a) && ty_equal(x->b, y->b);
    case MTy::K::Box:
      return x->res == y->res && ty_equal(x->a, y->a);
    case MTy::K::List:
      return ty_equal(x->a, y->a);
  }
  return false;
}

inline std::string ty_string(const MTyPtr& t) {
  switch (t->k) {
    case MTy::K::Int: return "Int";
    case MTy::K::Var: return t->var;
    case MTy::K::Arrow: {
      std::string dom = ty_string(t->a);
      if (t->a->k == MTy::K::Arrow) dom = "(" + dom + ")";
      return dom + " → " + ty_string(t->b);
    }
    case MTy::K::Box: {
      std::string body = ty_string(t->a);
      if (t->a->k == MTy::K::Arrow) body = "(" + body + ")";
      return "□_" + t->res.to_string() + " " + body;
    }
    case MTy::K::Pair:
      return "(" + ty_string(t->a) + ", " + ty_string(t->b) + ")";
    case MTy::K::List:
      return "[" + ty_string(t->a) + "]";
  }
  return "?";
}

inline void ty_free_vars(const MTyPtr& t, std::set<std::string>& tyvars,
                         std::set<std::string>& resvars) {
  switch (t->k) {
    case MTy::K::Var: tyvars.insert(t->var); return;
    case MTy::K::Box:
      t->res.collect_vars(resvars);
      ty_free_vars(t->a, tyvars, resvars);
      return;
    default:
      if (t->a) ty_free_vars(t->a, tyvars, resvars);
      if (t->b) ty_free_vars(t->b, tyvars, resvars);
      return;
  }
}

// ---------------------------------------------------------------------------
// Terms and patterns
// ---------------------------------------------------------------------------

enum class ConKind { Pair, Cons, Nil };

struct MPattern;
using MPatternPtr = std::shared_ptr<const MPattern>;

struct MPattern {
  enum class K { Var, Int, Promote, Con };
  K k;
  std::string name;  // Var
  long value = 0;    // Int
  MPatternPtr sub;   // Promote
  ConKind con = ConKind::Pair;
  std::vector<MPatternPtr> args;  // Con

  static MPatternPtr var(std::string n) {
    auto p = std::make_shared<MPattern>(MPattern{K::Var});
    p->name = std::move(n);
    return p;
  }
  static MPatternPtr integer(long v) {
    auto p = std::make_shared<MPattern>(MPattern{K::Int});
    p->value = v;
    return p;
  }
  static MPatternPtr promote(MPatternPtr s) {
    auto p = std::make_shared<MPattern>(MPattern{K::Promote});
    p->sub = std::move(s);
    return p;
  }
  static MPatternPtr make_con(ConKind c, std::vector<MPatternPtr> args) {
    auto p = std::make_shared<MPattern>(MPattern{K::Con});
    p->con = c;
    p->args = std::move(args);
    return p;
  }
};

struct MTerm;
using MTermPtr = std::shared_ptr<const MTerm>;

struct MBranch {
  MPatternPtr pattern;
  MTermPtr body;
};

struct MTerm {
  enum class K { Int, Var, App, Lam, Promote, Con, Case, VerOf, Unversion, BinOp };
  K k;
  long value = 0;
  std::string name;
  MTermPtr a, b;
  MPatternPtr pattern;            // Lam
  ConKind con = ConKind::Pair;    // Con
  std::vector<MTermPtr> args;     // Con
  std::vector<MBranch> branches;  // Case (scrutinee in a)
  PartialLabel label;             // VerOf
  BinOpKind op = BinOpKind::Add;  // BinOp
  Span span;

  static MTermPtr integer(long v) {
    auto t = std::make_shared<MTerm>(MTerm{K::Int});
    t->value = v;
    return t;
  }
  static MTermPtr var(std::string n) {
    auto t = std::make_shared<MTerm>(MTerm{K::Var});
    t->name = std::move(n);
    return t;
  }
  static MTermPtr app(MTermPtr f, MTermPtr x) {
    auto t = std::make_shared<MTerm>(MTerm{K::App});
    t->a = std::move(f);
    t->b = std::move(x);
    return t;
  }
  static MTermPtr lam(MPatternPtr p, MTermPtr body) {
    auto t = std::make_shared<MTerm>(MTerm{K::Lam});
    t->pattern = std::move(p);
    t->a = std::move(body);
    return t;
  }
  static MTermPtr promote(MTermPtr body) {
    auto t = std::make_shared<MTerm>(MTerm{K::Promote});
    t->a = std::move(body);
    return t;
  }
  static MTermPtr make_con(ConKind c, std::vector<MTermPtr> args) {
    auto t = std::make_shared<MTerm>(MTerm{K::Con});
    t->con = c;
    t->args = std::move(args);
    return t;
  }
  static MTermPtr case_of(MTermPtr scrutinee, std::vector<MBranch> branches) {
    auto t = std::make_shared<MTerm>(MTerm{K::Case});
    t->a = std::move(scrutinee);
    t->branches = std::move(branches);
    return t;
  }
  static MTermPtr ver_of(PartialLabel l, MTermPtr body) {
    auto t = std::make_shared<MTerm>(MTerm{K::VerOf});
    t->label = std::move(l);
    t->a = std::move(body);
    return t;
  }
  static MTermPtr unversion(MTermPtr body) {
    auto t = std::make_shared<MTerm>(MTerm{K::Unversion});
    t->a = std::move(body);
    return t;
  }
  static MTermPtr binop(BinOpKind op, MTermPtr l, MTermPtr r) {
    auto t = std::make_shared<MTerm>(MTerm{K::BinOp});
    t->op = op;
    t->a = std::move(l);
    t->b = std::move(r);
    return t;
  }
};

inline void pattern_vars(const MPatternPtr& p, std::set<std::string>& out) {
  switch (p->k) {
    case MPattern::K::Var: out.insert(p->name); return;
    case MPattern::K::Int: return;
    case MPattern::K::Promote: pattern_vars(p->sub, out); return;
    case MPattern::K::Con:
      for (const auto& a : p->args) pattern_vars(a, out);
      return;
  }
}

inline void term_free_vars(const MTermPtr& t, std::set<std::string>& bound,
                           std::set<std::string>& out) {
  switch (t->k) {
    case MTerm::K::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case MTerm::K::Lam: {
      std::set<std::string> vars;
      pattern_vars(t->pattern, vars);
      std::vector<std::string> added;
      for (const auto& v : vars)
        if (bound.insert(v).second) added.push_back(v);
      term_free_vars(t->a, bound, out);
      for (const auto& v : added) bound.erase(v);
      return;
    }
    case MTerm::K::Case: {
      term_free_vars(t->a, bound, out);
      for (const auto& br : t->branches) {
        std::set<std::string> vars;
        pattern_vars(br.pattern, vars);
        std::vector<std::string> added;
        for (const auto& v : vars)
          if (bound.insert(v).second) added.push_back(v);
        term_free_vars(br.body, bound, out);
        for (const auto& v : added) bound.erase(v);
      }
      return;
    }
    case MTerm::K::Con:
      for (const auto& a : t->args) term_free_vars(a, bound, out);
      return;
    default:
      if (t->a) term_free_vars(t->a, bound, out);
      if (t->b) term_free_vars(t->b, bound, out);
      return;
  }
}

inline std::set<std::string> term_free_vars(const MTermPtr& t) {
  std::set<std::string> bound, out;
  term_free_vars(t, bound, out);
  return out;
}

namespace mdetail {
inline void constraint_fv(const MTermPtr& t, std::set<std::string>& bound,
                          std::set<std::string>& out) {
  if (t->k == MTerm::K::Unversion) return;  // unversion severs outer dependencies
  switch (t->k) {
    case MTerm::K::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case MTerm::K::Lam:
    case MTerm::K::Case: {
      std::set<std::string> saved = bound;
      if (t->k == MTerm::K::Lam) {
        pattern_vars(t->pattern, bound);
        constraint_fv(t->a, bound, out);
      } else {
        constraint_fv(t->a, bound, out);
        for (const auto& br : t->branches) {
          std::set<std::string> inner = saved;
          pattern_vars(br.pattern, inner);
          constraint_fv(br.body, inner, out);
        }
      }
      bound = saved;
      return;
    }
    case MTerm::K::Con:
      for (const auto& a : t->args) constraint_fv(a, bound, out);
      return;
    default:
      if (t->a) constraint_fv(t->a, bound, out);
      if (t->b) constraint_fv(t->b, bound, out);
      return;
  }
}
}  // namespace mdetail

// The variables a promotion or ver-of must hold version-consistent: free
// variables of the body, except those occurring only under an unversion,
// whose dependencies the programmer has cut at that boundary.
inline std::set<std::string> constraint_free_vars(const MTermPtr& t) {
  std::set<std::string> bound, out;
  mdetail::constraint_fv(t, bound, out);
  return out;
}

inline std::string pattern_string(const MPatternPtr& p) {
  switch (p->k) {
    case MPattern::K::Var: return p->name;
    case MPattern::K::Int: return std::to_string(p->value);
    case MPattern::K::Promote: return "[" + pattern_string(p->sub) + "]";
    case MPattern::K::Con:
      switch (p->con) {
        case ConKind::Pair:
          return "(" + pattern_string(p->args[0]) + ", " + pattern_string(p->args[1]) + ")";
        case ConKind::Cons:
          return "(" + pattern_string(p->args[0]) + " : " + pattern_string(p->args[1]) + ")";
        case ConKind::Nil:
          return "[]";
      }
  }
  return "?";
}

inline std::string term_string(const MTermPtr& t) {
  auto atom = [](const MTermPtr& u, const std::string& s) {
    switch (u->k) {
      case MTerm::K::Int:
      case MTerm::K::Var:
      case MTerm::K::Promote:
      case MTerm::K::Con:
        return s;
      default:
        return "(" + s + ")";
    }
  };
  switch (t->k) {
    case MTerm::K::Int: return std::to_string(t->value);
    case MTerm::K::Var: return t->name;
    case MTerm::K::App: {
      std::string fn = term_string(t->a);
      if (t->a->k != MTerm::K::App) fn = atom(t->a, fn);
      return fn + " " + atom(t->b, term_string(t->b));
    }
    case MTerm::K::Lam:
      return "λ" + pattern_string(t->pattern) + "." + term_string(t->a);
    case MTerm::K::Promote: return "[" + term_string(t->a) + "]";
    case MTerm::K::Con:
      switch (t->con) {
        case ConKind::Pair:
          return "(" + term_string(t->args[0]) + ", " + term_string(t->args[1]) + ")";
        case ConKind::Cons:
          return atom(t->args[0], term_string(t->args[0])) + " : " +
                 atom(t->args[1], term_string(t->args[1]));
        case ConKind::Nil:
          return "[]";
      }
      return "?";
    case MTerm::K::Case: {
      std::string out = "case " + term_string(t->a) + " of {";
      for (std::size_t i = 0; i < t->branches.size(); ++i) {
        if (i) out += "; ";
        out += pattern_string(t->branches[i].pattern) + " ↦ " +
               term_string(t->branches[i].body);
      }
      return out + "}";
    }
    case MTerm::K::VerOf:
      return "ver " + partial_label_string(t->label) + " of " + atom(t->a, term_string(t->a));
    case MTerm::K::Unversion:
      return "unversion " + atom(t->a, term_string(t->a));
    case MTerm::K::BinOp:
      return atom(t->a, term_string(t->a)) + " " + binop_name(t->op) + " " +
             atom(t->b, term_string(t->b));
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Typing contexts
// ---------------------------------------------------------------------------

struct Assumption {
  std::string name;
  MTyPtr type;
  std::optional<Resource> grade;  // nullopt = linear x:A, otherwise x:[A]_r

  bool linear() const { return !grade.has_value(); }
};

// Ordered association list. The declarative rules are order-sensitive in
// proofs, the algorithmic system never relies on order; tests compare
// order-insensitively.
class TypeEnv {
 public:
  TypeEnv() = default;

  void push_linear(std::string name, MTyPtr ty) {
    items_.push_back(Assumption{std::move(name), std::move(ty), std::nullopt});
  }
  void push_graded(std::string name, MTyPtr ty, Resource r) {
    items_.push_back(Assumption{std::move(name), std::move(ty), std::move(r)});
  }
  void push(Assumption a) { items_.push_back(std::move(a)); }

  const Assumption* lookup(const std::string& name) const {
    for (const auto& a : items_)
      if (a.name == name) return &a;
    return nullptr;
  }

  bool contains(const std::string& name) const { return lookup(name) != nullptr; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const Assumption& operator[](std::size_t i) const { return items_[i]; }

  TypeEnv restricted_to(const std::set<std::string>& names) const {
    TypeEnv out;
    for (const auto& a : items_)
      if (names.count(a.name)) out.items_.push_back(a);
    return out;
  }

  TypeEnv without(const std::set<std::string>& names) const {
    TypeEnv out;
    for (const auto& a : items_)
      if (!names.count(a.name)) out.items_.push_back(a);
    return out;
  }

  std::string to_string() const {
    if (items_.empty()) return "∅";
    std::string out;
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (i) out += ", ";
      const auto& a = items_[i];
      if (a.linear())
        out += a.name + ":" + ty_string(a.type);
      else
        out += a.name + ":[" + ty_string(a.type) + "]_" + a.grade->to_string();
    }
    return out;
  }

 private:
  std::vector<Assumption> items_;
};

// Context concatenation: linear assumptions must be disjoint, shared graded
// assumptions merge with + on their grades.
inline TypeEnv ctx_concat(const TypeEnv& g1, const TypeEnv& g2) {
  TypeEnv out;
  for (const auto& a : g1) {
    const Assumption* other = g2.lookup(a.name);
    if (!other) {
      out.push(a);
      continue;
    }
    if (a.linear() || other->linear())
      throw LinearClash("variable " + a.name + " is linear in a shared context");
    if (!ty_equal(a.type, other->type))
      throw TypeMismatch("variable " + a.name + " has differing types in merged contexts: " +
                         ty_string(a.type) + " vs " + ty_string(other->type));
    out.push_graded(a.name, a.type, sym_add(*a.grade, *other->grade));
  }
  for (const auto& b : g2)
    if (!g1.contains(b.name)) out.push(b);
  return out;
}

// Context multiplication r . [Gamma]: every grade multiplied by r.
inline TypeEnv ctx_scale(const Resource& r, const TypeEnv& g) {
  TypeEnv out;
  for (const auto& a : g) {
    if (a.linear())
      throw LinearInScaledContext("cannot scale linear assumption " + a.name);
    out.push_graded(a.name, a.type, sym_mul(r, *a.grade));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

struct DepConstraint;
using DepPtr = std::shared_ptr<const DepConstraint>;

// C ::= T | C and C | C or C | a <= a' | a <= <M = V>
//
// A variable dependency carries the module scope it ranges over: the label
// universe of the module whose translation generated it. The two labels
// must agree on those components. An empty scope means every module of the
// solving unit, which is the plain vector reading.
struct DepConstraint {
  enum class K { Top, And, Or, VarDep, LabelDep };
  K k;
  DepPtr l, r;
  std::string var, var2;  // VarDep: var <= var2; LabelDep: var <= dep
  PartialLabel dep;
  std::set<ModuleName> scope;  // VarDep only; empty = whole universe
  std::string note;  // provenance for diagnostics, e.g. "join (Matrix 0.15.0)"

  static DepPtr top() {
    static DepPtr t = std::make_shared<DepConstraint>(DepConstraint{K::Top});
    return t;
  }
  static DepPtr conj(DepPtr a, DepPtr b) {
    if (a->k == K::Top) return b;
    if (b->k == K::Top) return a;
    auto c = std::make_shared<DepConstraint>(DepConstraint{K::And});
    c->l = std::move(a);
    c->r = std::move(b);
    return c;
  }
  static DepPtr disj(DepPtr a, DepPtr b) {
    auto c = std::make_shared<DepConstraint>(DepConstraint{K::Or});
    c->l = std::move(a);
    c->r = std::move(b);
    return c;
  }
  static DepPtr var_dep(std::string a, std::string b, std::set<ModuleName> scope = {},
                        std::string note = {}) {
    auto c = std::make_shared<DepConstraint>(DepConstraint{K::VarDep});
    c->var = std::move(a);
    c->var2 = std::move(b);
    c->scope = std::move(scope);
    c->note = std::move(note);
    return c;
  }
  static DepPtr label_dep(std::string a, PartialLabel d, std::string note = {}) {
    auto c = std::make_shared<DepConstraint>(DepConstraint{K::LabelDep});
    c->var = std::move(a);
    c->dep = std::move(d);
    c->note = std::move(note);
    return c;
  }
};

inline void constraint_vars(const DepPtr& c, std::set<std::string>& out) {
  switch (c->k) {
    case DepConstraint::K::Top: return;
    case DepConstraint::K::And:
    case DepConstraint::K::Or:
      constraint_vars(c->l, out);
      constraint_vars(c->r, out);
      return;
    case DepConstraint::K::VarDep:
      out.insert(c->var);
      out.insert(c->var2);
      return;
    case DepConstraint::K::LabelDep:
      out.insert(c->var);
      return;
  }
}

inline std::string constraint_string(const DepPtr& c) {
  switch (c->k) {
    case DepConstraint::K::Top: return "⊤";
    case DepConstraint::K::And:
      return constraint_string(c->l) + " ∧ " + constraint_string(c->r);
    case DepConstraint::K::Or:
      return "(" + constraint_string(c->l) + " ∨ " + constraint_string(c->r) + ")";
    case DepConstraint::K::VarDep:
      return c->var + " ⪯ " + c->var2;
    case DepConstraint::K::LabelDep:
      return c->var + " ⪯ " + partial_label_string(c->dep);
  }
  return "?";
}

inline std::size_t constraint_size(const DepPtr& c) {
  switch (c->k) {
    case DepConstraint::K::And:
    case DepConstraint::K::Or:
      return 1 + constraint_size(c->l) + constraint_size(c->r);
    default:
      return 1;
  }
}

// Theta: a conjunction of type equations A ~ B.
struct TypeEq {
  MTyPtr lhs, rhs;
};
using TypeConstraint = std::vector<TypeEq>;

inline std::string constraint_string(const TypeConstraint& theta) {
  if (theta.empty()) return "⊤";
  std::string out;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (i) out += " ∧ ";
    out += "{" + ty_string(theta[i].lhs) + " ∼ " + ty_string(theta[i].rhs) + "}";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kind context and substitutions
// ---------------------------------------------------------------------------

// Sigma: every variable in scope has exactly one kind.
class KindCtx {
 public:
  void bind(const std::string& name, TyKind k) {
    auto it = kinds_.find(name);
    if (it != kinds_.end() && it->second != k)
      throw KindError("variable " + name + " rebound at a different kind");
    kinds_[name] = k;
  }
  std::optional<TyKind> lookup(const std::string& name) const {
    auto it = kinds_.find(name);
    if (it == kinds_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const std::string& name) const { return kinds_.count(name) != 0; }
  bool contains_all(const KindCtx& other) const {
    for (const auto& [n, k] : other.kinds_) {
      auto mine = lookup(n);
      if (!mine || *mine != k) return false;
    }
    return true;
  }
  std::size_t size() const { return kinds_.size(); }
  auto begin() const { return kinds_.begin(); }
  auto end() const { return kinds_.end(); }

 private:
  std::map<std::string, TyKind> kinds_;
};

// theta maps type variables to types and resource variables to resources;
// eta (solver output) is the special case mapping resource variables to
// singleton label sets.
struct Subst {
  std::map<std::string, MTyPtr> ty;
  std::map<std::string, Resource> res;

  bool empty() const { return ty.empty() && res.empty(); }
};

inline Resource apply_subst(const Subst& s, const Resource& r) {
  switch (r.kind()) {
    case Resource::Kind::Bottom:
    case Resource::Kind::Labels:
      return r;  // concrete labels are fixpoints
    case Resource::Kind::Var: {
      auto it = s.res.find(r.var_name());
      return it == s.res.end() ? r : it->second;
    }
    case Resource::Kind::Sum:
    case Resource::Kind::Product: {
      bool sum = r.kind() == Resource::Kind::Sum;
      Resource acc = sum ? Resource::bottom() : Resource::unit();
      for (const auto& p : r.parts()) {
        Resource q = apply_subst(s, p);
        acc = sum ? sym_add(acc, q) : sym_mul(acc, q);
      }
      return acc;
    }
  }
  return r;
}

inline MTyPtr apply_subst(const Subst& s, const MTyPtr& t) {
  switch (t->k) {
    case MTy::K::Int: return t;
    case MTy::K::Var: {
      auto it = s.ty.find(t->var);
      if (it != s.ty.end()) return it->second;
      if (s.res.count(t->var))
        throw KindError("type variable " + t->var + " mapped to a resource");
      return t;
    }
    case MTy::K::Arrow: return MTy::arrow(apply_subst(s, t->a), apply_subst(s, t->b));
    case MTy::K::Box: return MTy::box(apply_subst(s, t->res), apply_subst(s, t->a));
    case MTy::K::Pair: return MTy::pair(apply_subst(s, t->a), apply_subst(s, t->b));
    case MTy::K::List: return MTy::list(apply_subst(s, t->a));
  }
  return t;
}

inline TypeEnv apply_subst(const Subst& s, const TypeEnv& g) {
  TypeEnv out;
  for (const auto& a : g) {
    if (a.linear())
      out.push_linear(a.name, apply_subst(s, a.type));
    else
      out.push_graded(a.name, apply_subst(s, a.type), apply_subst(s, *a.grade));
  }
  return out;
}

// Constraint substitution. Variables may be renamed or instantiated with a
// singleton label set; a VarDep whose right side becomes concrete turns
// into the corresponding label dependency.
inline DepPtr apply_subst(const Subst& s, const DepPtr& c) {
  auto subst_var = [&](const std::string& v) -> Resource {
    auto it = s.res.find(v);
    return it == s.res.end() ? Resource::var(v) : it->second;
  };
  auto as_partial = [](const Resource& r) -> PartialLabel {
    if (!r.is_labels() || r.label_set().size() != 1)
      throw Error("cannot substitute non-singleton resource into a dependency constraint: " +
                  r.to_string());
    PartialLabel d;
    for (const auto& [m, v] : r.label_set().begin()->assignment()) d[m] = v;
    return d;
  };
  switch (c->k) {
    case DepConstraint::K::Top: return c;
    case DepConstraint::K::And:
      return DepConstraint::conj(apply_subst(s, c->l), apply_subst(s, c->r));
    case DepConstraint::K::Or:
      return DepConstraint::disj(apply_subst(s, c->l), apply_subst(s, c->r));
    case DepConstraint::K::VarDep: {
      Resource a = subst_var(c->var), b = subst_var(c->var2);
      if (a.is_var() && b.is_var())
        return DepConstraint::var_dep(a.var_name(), b.var_name(), c->scope, c->note);
      if (a.is_var()) return DepConstraint::label_dep(a.var_name(), as_partial(b), c->note);
      throw Error("left side of a variable dependency must remain a variable");
    }
    case DepConstraint::K::LabelDep: {
      Resource a = subst_var(c->var);
      if (a.is_var()) return DepConstraint::label_dep(a.var_name(), c->dep, c->note);
      throw Error("left side of a label dependency must remain a variable");
    }
  }
  return c;
}

inline TypeConstraint apply_subst(const Subst& s, const TypeConstraint& theta) {
  TypeConstraint out;
  out.reserve(theta.size());
  for (const auto& eq : theta) out.push_back({apply_subst(s, eq.lhs), apply_subst(s, eq.rhs)});
  return out;
}

}  // namespace vl
