#pragma once

// Girard's translation between the surface language and VLMini.
//
// Forward: every lambda binds a promoted pattern and every argument
// position is promoted; a surface let becomes the contextual-let sugar
// (\[x].t2) [t1]. Constructor arguments promote as a whole, which is the
// pull-normalized placement for data structures (a promoted pair is one
// versioned value, not a pair of promotions); case scrutinees stay bare,
// the push side, so their components bind at the scrutinee's own grade.
//
// Reverse: erases promotions, promoted patterns and version-control
// wrappers, and recognizes the let-sugar shape back into a let.

#include "vl/ast.hpp"
#include "vl/vlmini.hpp"

namespace vl {

struct ResidualVariable : Error {
  using Error::Error;
};

inline MPatternPtr forward_translate(const SPatternPtr& p) {
  switch (p->kind) {
    case SPattern::Kind::Var: return MPattern::var(p->name);
    case SPattern::Kind::Int: return MPattern::integer(p->value);
    case SPattern::Kind::Nil: return MPattern::make_con(ConKind::Nil, {});
    case SPattern::Kind::Pair:
      return MPattern::make_con(ConKind::Pair,
                           {forward_translate(p->first), forward_translate(p->second)});
    case SPattern::Kind::Cons:
      return MPattern::make_con(ConKind::Cons,
                           {forward_translate(p->first), forward_translate(p->second)});
  }
  throw Error("unreachable pattern kind");
}

inline MTermPtr forward_translate(const STermPtr& t);

// Translation of an argument position: the argument is promoted, except
// that an unversion already produces a versioned value (its wrapper
// promotion is inserted inside), so it stands on its own.
inline MTermPtr forward_translate_promoted(const STermPtr& t) {
  if (t->kind == STerm::Kind::Unversion) return forward_translate(t);
  return MTerm::promote(forward_translate(t));
}

inline MTermPtr forward_translate(const STermPtr& t) {
  switch (t->kind) {
    case STerm::Kind::Int: return MTerm::integer(t->value);
    case STerm::Kind::Var: return MTerm::var(t->name);
    case STerm::Kind::Lam:
      return MTerm::lam(MPattern::promote(MPattern::var(t->name)), forward_translate(t->a));
    case STerm::Kind::App:
      return MTerm::app(forward_translate(t->a), forward_translate_promoted(t->b));
    case STerm::Kind::Let:
      // let x = t1 in t2  ==  (\[x].t2) [t1]
      return MTerm::app(MTerm::lam(MPattern::promote(MPattern::var(t->name)),
                                   forward_translate(t->b)),
                        forward_translate_promoted(t->a));
    case STerm::Kind::Pair:
      return MTerm::make_con(ConKind::Pair, {forward_translate(t->a), forward_translate(t->b)});
    case STerm::Kind::Nil:
      return MTerm::make_con(ConKind::Nil, {});
    case STerm::Kind::Cons:
      return MTerm::make_con(ConKind::Cons, {forward_translate(t->a), forward_translate(t->b)});
    case STerm::Kind::Case: {
      std::vector<MBranch> branches;
      for (const auto& br : t->branches)
        branches.push_back(MBranch{forward_translate(br.pattern), forward_translate(br.body)});
      return MTerm::case_of(forward_translate(t->a), std::move(branches));
    }
    case STerm::Kind::VerOf:
      return MTerm::ver_of(t->label, forward_translate(t->a));
    case STerm::Kind::Unversion:
      // The operand is always a versioned value: wrap it in a promotion
      // whose resource variable inference mints later.
      return MTerm::unversion(MTerm::promote(forward_translate(t->a)));
    case STerm::Kind::BinOp:
      return MTerm::binop(t->op, forward_translate(t->a), forward_translate(t->b));
  }
  throw Error("unreachable term kind");
}

inline SPatternPtr reverse_translate(const MPatternPtr& p) {
  switch (p->k) {
    case MPattern::K::Var: return SPattern::var(p->name);
    case MPattern::K::Int: return SPattern::integer(p->value);
    case MPattern::K::Promote: return reverse_translate(p->sub);
    case MPattern::K::Con:
      switch (p->con) {
        case ConKind::Nil: return SPattern::nil();
        case ConKind::Pair:
          return SPattern::pair(reverse_translate(p->args[0]), reverse_translate(p->args[1]));
        case ConKind::Cons:
          return SPattern::cons(reverse_translate(p->args[0]), reverse_translate(p->args[1]));
      }
  }
  throw Error("unreachable pattern kind");
}

inline STermPtr reverse_translate(const MTermPtr& t) {
  switch (t->k) {
    case MTerm::K::Int: return STerm::integer(t->value);
    case MTerm::K::Var: return STerm::var(t->name);
    case MTerm::K::App: {
      // (\[x].t2) [t1] is the let sugar; an unversion argument stands in
      // for the promotion.
      if (t->a->k == MTerm::K::Lam && t->a->pattern->k == MPattern::K::Promote &&
          t->a->pattern->sub->k == MPattern::K::Var &&
          (t->b->k == MTerm::K::Promote || t->b->k == MTerm::K::Unversion)) {
        MTermPtr bound = t->b->k == MTerm::K::Promote ? t->b->a : t->b;
        return STerm::let(t->a->pattern->sub->name, reverse_translate(bound),
                          reverse_translate(t->a->a));
      }
      return STerm::app(reverse_translate(t->a), reverse_translate(t->b));
    }
    case MTerm::K::Lam: {
      MPatternPtr p = t->pattern;
      if (p->k == MPattern::K::Promote) p = p->sub;
      if (p->k != MPattern::K::Var)
        throw Error("lambda pattern has no surface form: " + pattern_string(t->pattern));
      return STerm::lam(p->name, reverse_translate(t->a));
    }
    case MTerm::K::Promote:
      return reverse_translate(t->a);
    case MTerm::K::Con:
      switch (t->con) {
        case ConKind::Nil: return STerm::nil();
        case ConKind::Pair:
          return STerm::pair(reverse_translate(t->args[0]), reverse_translate(t->args[1]));
        case ConKind::Cons:
          return STerm::cons(reverse_translate(t->args[0]), reverse_translate(t->args[1]));
      }
      throw Error("unreachable constructor");
    case MTerm::K::Case: {
      std::vector<SBranch> branches;
      for (const auto& br : t->branches)
        branches.push_back(SBranch{reverse_translate(br.pattern), reverse_translate(br.body)});
      return STerm::case_of(reverse_translate(t->a), std::move(branches));
    }
    case MTerm::K::VerOf:
    case MTerm::K::Unversion:
      return reverse_translate(t->a);
    case MTerm::K::BinOp:
      return STerm::binop(t->op, reverse_translate(t->a), reverse_translate(t->b));
  }
  throw Error("unreachable term kind");
}

// Rewrites beta-redexes of the let shape back into lets, so that
// reverse_translate . forward_translate is the identity modulo this
// normalization.
inline STermPtr let_normalize(const STermPtr& t) {
  switch (t->kind) {
    case STerm::Kind::Int:
    case STerm::Kind::Var:
    case STerm::Kind::Nil:
      return t;
    case STerm::Kind::App: {
      STermPtr f = let_normalize(t->a);
      STermPtr x = let_normalize(t->b);
      if (f->kind == STerm::Kind::Lam) return STerm::let(f->name, x, f->a, t->span);
      return STerm::app(f, x, t->span);
    }
    case STerm::Kind::Lam:
      return STerm::lam(t->name, let_normalize(t->a), t->span);
    case STerm::Kind::Let:
      return STerm::let(t->name, let_normalize(t->a), let_normalize(t->b), t->span);
    case STerm::Kind::Pair:
      return STerm::pair(let_normalize(t->a), let_normalize(t->b), t->span);
    case STerm::Kind::Cons:
      return STerm::cons(let_normalize(t->a), let_normalize(t->b), t->span);
    case STerm::Kind::Case: {
      std::vector<SBranch> branches;
      for (const auto& br : t->branches)
        branches.push_back(SBranch{br.pattern, let_normalize(br.body)});
      return STerm::case_of(let_normalize(t->a), std::move(branches), t->span);
    }
    case STerm::Kind::VerOf:
      return STerm::ver_of(t->label, let_normalize(t->a), t->span);
    case STerm::Kind::Unversion:
      return STerm::unversion(let_normalize(t->a), t->span);
    case STerm::Kind::BinOp:
      return STerm::binop(t->op, let_normalize(t->a), let_normalize(t->b), t->span);
  }
  return t;
}

}  // namespace vl
