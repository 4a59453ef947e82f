#pragma once

// Call-by-name evaluator for specialized surface programs. Arguments pass
// unevaluated, matching the core calculus where extraction defers work
// until a version is chosen; pattern matching forces only as much of the
// scrutinee as the pattern shape demands.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "vl/ast.hpp"

namespace vl {

struct RuntimeError : Error {
  using Error::Error;
};
struct FuelBudget : Error {
  using Error::Error;
};

class SurfaceEvaluator {
 public:
  explicit SurfaceEvaluator(std::map<std::string, STermPtr> globals, long fuel = 1000000)
      : globals_(std::move(globals)), fuel_(fuel) {}

  STermPtr whnf(STermPtr t) {
    while (true) {
      if (--fuel_ < 0) throw FuelBudget("evaluation fuel exhausted");
      switch (t->kind) {
        case STerm::Kind::Int:
        case STerm::Kind::Lam:
        case STerm::Kind::Pair:
        case STerm::Kind::Nil:
        case STerm::Kind::Cons:
          return t;
        case STerm::Kind::Var: {
          auto it = globals_.find(t->name);
          if (it == globals_.end()) throw RuntimeError("unbound variable at runtime: " + t->name);
          t = it->second;
          break;
        }
        case STerm::Kind::App: {
          STermPtr f = whnf(t->a);
          if (f->kind != STerm::Kind::Lam)
            throw RuntimeError("application of a non-function value");
          t = subst(f->a, f->name, t->b);
          break;
        }
        case STerm::Kind::Let:
          t = subst(t->b, t->name, t->a);
          break;
        case STerm::Kind::BinOp: {
          long l = as_int(whnf(t->a));
          long r = as_int(whnf(t->b));
          t = STerm::integer(apply_op(t->op, l, r));
          break;
        }
        case STerm::Kind::Case: {
          STermPtr next = nullptr;
          for (const auto& br : t->branches) {
            std::vector<std::pair<std::string, STermPtr>> binds;
            if (match(br.pattern, t->a, binds)) {
              next = br.body;
              for (const auto& [n, v] : binds) next = subst(next, n, v);
              break;
            }
          }
          if (!next) throw RuntimeError("no case branch matched");
          t = next;
          break;
        }
        case STerm::Kind::VerOf:
        case STerm::Kind::Unversion:
          throw RuntimeError("version-control term survived specialization");
      }
    }
  }

  // Fully forces a value for printing.
  STermPtr force(STermPtr t) {
    t = whnf(std::move(t));
    switch (t->kind) {
      case STerm::Kind::Pair: return STerm::pair(force(t->a), force(t->b));
      case STerm::Kind::Cons: return STerm::cons(force(t->a), force(t->b));
      default: return t;
    }
  }

 private:
  std::map<std::string, STermPtr> globals_;
  long fuel_;
  int rename_counter_ = 0;

  static long as_int(const STermPtr& t) {
    if (t->kind != STerm::Kind::Int) throw RuntimeError("expected an integer value");
    return t->value;
  }

  static long apply_op(BinOpKind op, long l, long r) {
    switch (op) {
      case BinOpKind::Add: return l + r;
      case BinOpKind::Sub: return l - r;
      case BinOpKind::Mul: return l * r;
      case BinOpKind::Eq: return l == r ? 1 : 0;
      case BinOpKind::Ne: return l != r ? 1 : 0;
      case BinOpKind::Lt: return l < r ? 1 : 0;
      case BinOpKind::Le: return l <= r ? 1 : 0;
      case BinOpKind::Gt: return l > r ? 1 : 0;
      case BinOpKind::Ge: return l >= r ? 1 : 0;
    }
    throw RuntimeError("unknown operator");
  }

  bool match(const SPatternPtr& p, const STermPtr& scrutinee,
             std::vector<std::pair<std::string, STermPtr>>& binds) {
    switch (p->kind) {
      case SPattern::Kind::Var:
        binds.emplace_back(p->name, scrutinee);
        return true;
      case SPattern::Kind::Int: {
        STermPtr v = whnf(scrutinee);
        return v->kind == STerm::Kind::Int && v->value == p->value;
      }
      case SPattern::Kind::Nil:
        return whnf(scrutinee)->kind == STerm::Kind::Nil;
      case SPattern::Kind::Pair: {
        STermPtr v = whnf(scrutinee);
        if (v->kind != STerm::Kind::Pair) return false;
        return match(p->first, v->a, binds) && match(p->second, v->b, binds);
      }
      case SPattern::Kind::Cons: {
        STermPtr v = whnf(scrutinee);
        if (v->kind != STerm::Kind::Cons) return false;
        return match(p->first, v->a, binds) && match(p->second, v->b, binds);
      }
    }
    return false;
  }

  STermPtr subst(const STermPtr& t, const std::string& x, const STermPtr& s) {
    switch (t->kind) {
      case STerm::Kind::Int:
      case STerm::Kind::Nil:
        return t;
      case STerm::Kind::Var:
        return t->name == x ? s : t;
      case STerm::Kind::Lam: {
        if (t->name == x) return t;
        if (free_in(t->name, s)) {
          std::string fresh = t->name + "$" + std::to_string(rename_counter_++);
          STermPtr body = subst(t->a, t->name, STerm::var(fresh));
          return STerm::lam(fresh, subst(body, x, s), t->span);
        }
        return STerm::lam(t->name, subst(t->a, x, s), t->span);
      }
      case STerm::Kind::Let: {
        STermPtr bound = subst(t->a, x, s);
        if (t->name == x) return STerm::let(t->name, bound, t->b, t->span);
        if (free_in(t->name, s)) {
          std::string fresh = t->name + "$" + std::to_string(rename_counter_++);
          STermPtr body = subst(t->b, t->name, STerm::var(fresh));
          return STerm::let(fresh, bound, subst(body, x, s), t->span);
        }
        return STerm::let(t->name, bound, subst(t->b, x, s), t->span);
      }
      case STerm::Kind::Case: {
        std::vector<SBranch> branches;
        for (const auto& br : t->branches) {
          std::set<std::string> bound;
          pattern_binders(br.pattern, bound);
          if (bound.count(x)) {
            branches.push_back(br);
            continue;
          }
          for (const auto& b : bound)
            if (free_in(b, s))
              throw RuntimeError("pattern binder capture during substitution: " + b);
          branches.push_back(SBranch{br.pattern, subst(br.body, x, s)});
        }
        return STerm::case_of(subst(t->a, x, s), std::move(branches), t->span);
      }
      case STerm::Kind::App:
        return STerm::app(subst(t->a, x, s), subst(t->b, x, s), t->span);
      case STerm::Kind::Pair:
        return STerm::pair(subst(t->a, x, s), subst(t->b, x, s), t->span);
      case STerm::Kind::Cons:
        return STerm::cons(subst(t->a, x, s), subst(t->b, x, s), t->span);
      case STerm::Kind::BinOp:
        return STerm::binop(t->op, subst(t->a, x, s), subst(t->b, x, s), t->span);
      case STerm::Kind::VerOf:
        return STerm::ver_of(t->label, subst(t->a, x, s), t->span);
      case STerm::Kind::Unversion:
        return STerm::unversion(subst(t->a, x, s), t->span);
    }
    return t;
  }

  static void pattern_binders(const SPatternPtr& p, std::set<std::string>& out) {
    if (p->kind == SPattern::Kind::Var) out.insert(p->name);
    if (p->first) pattern_binders(p->first, out);
    if (p->second) pattern_binders(p->second, out);
  }

  static bool free_in(const std::string& x, const STermPtr& t) {
    switch (t->kind) {
      case STerm::Kind::Var: return t->name == x;
      case STerm::Kind::Lam: return t->name != x && free_in(x, t->a);
      case STerm::Kind::Let:
        return free_in(x, t->a) || (t->name != x && free_in(x, t->b));
      case STerm::Kind::Case: {
        if (free_in(x, t->a)) return true;
        for (const auto& br : t->branches) {
          std::set<std::string> bound;
          pattern_binders(br.pattern, bound);
          if (!bound.count(x) && free_in(x, br.body)) return true;
        }
        return false;
      }
      default:
        return (t->a && free_in(x, t->a)) || (t->b && free_in(x, t->b));
    }
  }
};

inline std::string value_string(const STermPtr& v) {
  switch (v->kind) {
    case STerm::Kind::Int: return std::to_string(v->value);
    case STerm::Kind::Pair: return "(" + value_string(v->a) + ", " + value_string(v->b) + ")";
    case STerm::Kind::Nil: return "[]";
    case STerm::Kind::Cons: {
      std::string out = "[" + value_string(v->a);
      STermPtr cur = v->b;
      while (cur->kind == STerm::Kind::Cons) {
        out += ", " + value_string(cur->a);
        cur = cur->b;
      }
      if (cur->kind != STerm::Kind::Nil) out += " | " + value_string(cur);
      return out + "]";
    }
    case STerm::Kind::Lam: return "<function>";
    default: return term_string(v);
  }
}

}  // namespace vl
