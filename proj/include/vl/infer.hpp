#pragma once

// Algorithmic type synthesis for VLMini. Synthesis walks the term emitting
// a type, an output kind context, a usage context, type equations, and
// dependency constraints; unification runs afterwards over the collected
// equations, not interleaved. Promotion is the one core rule that emits
// dependency constraints (ver-of additionally emits label dependencies).

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "vl/vlmini.hpp"

namespace vl {

struct NotAVersionedValue : Error {
  using Error::Error;
};
struct UnknownLabel : Error {
  using Error::Error;
};
struct NonVariableGrade : Error {
  using Error::Error;
};
struct OccursCheck : Error {
  using Error::Error;
};
struct UnifyMismatch : Error {
  using Error::Error;
};
struct ResourceMismatch : Error {
  using Error::Error;
};

struct SynthResult {
  MTyPtr type;
  KindCtx sigma;  // output kind context, always a superset of the input
  TypeEnv usage;
  TypeConstraint theta;
  DepPtr deps;
};

struct PatternSynthResult {
  TypeEnv bindings;
  KindCtx sigma;
  TypeConstraint theta;
  DepPtr deps;
};

// One inference session per compilation unit: a monotone counter keeps
// fresh names deterministic, and the registry of external modules backs
// the l `in` L premise of ver-of.
class InferSession {
 public:
  InferSession() = default;
  explicit InferSession(ModuleRegistry universe) { set_universe(std::move(universe)); }

  std::string fresh_name(const char* prefix) { return prefix + std::to_string(counter_++); }

  MTyPtr fresh_tyvar(KindCtx& sigma) {
    std::string n = fresh_name("t");
    sigma.bind(n, TyKind::Type);
    return MTy::tyvar(n);
  }
  Resource fresh_resvar(KindCtx& sigma) {
    std::string n = fresh_name("a");
    sigma.bind(n, TyKind::Labels);
    return Resource::var(n);
  }

  const ModuleRegistry& universe() const { return universe_; }
  void set_universe(ModuleRegistry u) {
    universe_ = std::move(u);
    scope_.clear();
    for (const auto& m : universe_.names()) scope_.insert(m);
  }
  // The module set over which this session's variable dependencies range.
  const std::set<ModuleName>& scope() const { return scope_; }

  // Binder types recorded per lambda node, so a solved synthesis can be
  // replayed against the declarative checker.
  std::map<const MTerm*, MTyPtr>& binder_types() { return binder_types_; }

 private:
  ModuleRegistry universe_;
  std::set<ModuleName> scope_;
  int counter_ = 0;
  std::map<const MTerm*, MTyPtr> binder_types_;
};

// Context grading [Gamma]_Labels: linear assumptions become graded at the
// unit resource (the empty label set); graded assumptions pass through.
inline TypeEnv grade_context(const KindCtx&, const TypeEnv& gamma) {
  TypeEnv out;
  for (const auto& a : gamma) {
    if (a.linear())
      out.push_graded(a.name, a.type, Resource::unit());
    else
      out.push(a);
  }
  return out;
}

// Variable-dependency generation: alpha <= r for every assumption grade,
// scoped to the generating module's label universe. A unit grade supports
// every label, so it contributes nothing.
inline DepPtr gen_var_deps(const KindCtx&, const std::string& alpha, const TypeEnv& gamma,
                           const std::set<ModuleName>& scope = {}) {
  DepPtr c = DepConstraint::top();
  for (const auto& a : gamma) {
    if (a.linear()) throw Error("gen_var_deps over a context with linear assumption " + a.name);
    const Resource& r = *a.grade;
    if (r.is_var()) {
      c = DepConstraint::conj(c, DepConstraint::var_dep(alpha, r.var_name(), scope));
    } else if (r.is_unit()) {
      continue;
    } else {
      throw Error("unexpected concrete grade " + r.to_string() + " in constraint generation");
    }
  }
  return c;
}

// Label-dependency generation: r <= D for every assumption grade. Grades
// here must be resource variables; the unit grade from context grading is
// vacuous and skipped, anything else concrete is rejected.
inline DepPtr gen_label_deps(const KindCtx&, const TypeEnv& gamma, const PartialLabel& d,
                             const std::string& note = {}) {
  DepPtr c = DepConstraint::top();
  for (const auto& a : gamma) {
    if (a.linear()) throw Error("gen_label_deps over a context with linear assumption " + a.name);
    const Resource& r = *a.grade;
    if (r.is_var()) {
      c = DepConstraint::conj(c, DepConstraint::label_dep(r.var_name(), d, note));
    } else if (r.is_unit()) {
      continue;
    } else {
      throw NonVariableGrade("grade " + r.to_string() + " of " + a.name +
                             " is not a resource variable");
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Unification
// ---------------------------------------------------------------------------

namespace detail {

inline bool occurs_in(const std::string& v, const MTyPtr& t) {
  std::set<std::string> tys, ress;
  ty_free_vars(t, tys, ress);
  return tys.count(v) || ress.count(v);
}

// Keeps the substitution idempotent: the new image is pre-applied, and the
// new binding is folded through every existing image.
inline void extend(Subst& s, const std::string& v, const MTyPtr& image) {
  MTyPtr img = apply_subst(s, image);
  if (img->k == MTy::K::Var && img->var == v) return;
  if (occurs_in(v, img))
    throw OccursCheck("occurs check: " + v + " in " + ty_string(img));
  Subst single;
  single.ty[v] = img;
  for (auto& [n, t] : s.ty) t = apply_subst(single, t);
  for (auto& [n, r] : s.res) r = apply_subst(single, r);
  s.ty[v] = img;
}

inline void extend(Subst& s, const std::string& v, const Resource& image) {
  Resource img = apply_subst(s, image);
  if (img.is_var() && img.var_name() == v) return;
  std::set<std::string> vars;
  img.collect_vars(vars);
  if (vars.count(v)) throw OccursCheck("occurs check: " + v + " in " + img.to_string());
  Subst single;
  single.res[v] = img;
  for (auto& [n, t] : s.ty) t = apply_subst(single, t);
  for (auto& [n, r] : s.res) r = apply_subst(single, r);
  s.res[v] = img;
}

}  // namespace detail

inline void unify_resources(const KindCtx& sigma, const Resource& a, const Resource& b, Subst& s);

// Unifies one equation into s (types are taken after s is applied).
inline void unify_types(const KindCtx& sigma, const MTyPtr& lhs, const MTyPtr& rhs, Subst& s) {
  MTyPtr a = apply_subst(s, lhs);
  MTyPtr b = apply_subst(s, rhs);
  if (ty_equal(a, b)) return;
  if (a->k == MTy::K::Var || b->k == MTy::K::Var) {
    const MTyPtr& v = a->k == MTy::K::Var ? a : b;
    const MTyPtr& other = a->k == MTy::K::Var ? b : a;
    if (auto k = sigma.lookup(v->var); k && *k != TyKind::Type)
      throw KindError("resource variable " + v->var + " used as a type");
    detail::extend(s, v->var, other);
    return;
  }
  if (a->k != b->k)
    throw UnifyMismatch("cannot unify " + ty_string(a) + " with " + ty_string(b));
  switch (a->k) {
    case MTy::K::Arrow:
      unify_types(sigma, b->a, a->a, s);
      unify_types(sigma, a->b, b->b, s);
      return;
    case MTy::K::Box:
      unify_types(sigma, a->a, b->a, s);
      unify_resources(sigma, apply_subst(s, a->res), apply_subst(s, b->res), s);
      return;
    case MTy::K::Pair:
      unify_types(sigma, a->a, b->a, s);
      unify_types(sigma, a->b, b->b, s);
      return;
    case MTy::K::List:
      unify_types(sigma, a->a, b->a, s);
      return;
    default:
      throw UnifyMismatch("cannot unify " + ty_string(a) + " with " + ty_string(b));
  }
}

inline void unify_resources(const KindCtx& sigma, const Resource& a, const Resource& b, Subst& s) {
  Resource x = apply_subst(s, a);
  Resource y = apply_subst(s, b);
  if (x == y) return;
  if (x.is_var() || y.is_var()) {
    const Resource& v = x.is_var() ? x : y;
    const Resource& other = x.is_var() ? y : x;
    if (auto k = sigma.lookup(v.var_name()); k && *k != TyKind::Labels)
      throw KindError("type variable " + v.var_name() + " used as a resource");
    detail::extend(s, v.var_name(), other);
    return;
  }
  if (x.is_ground() && y.is_ground())
    throw ResourceMismatch("cannot unify resources " + x.to_string() + " and " + y.to_string());
  throw ResourceMismatch("cannot unify symbolic resources " + x.to_string() + " and " +
                         y.to_string());
}

// Solves the whole conjunction Theta; the result satisfies every equation.
inline Subst unify(const KindCtx& sigma, const TypeConstraint& theta) {
  Subst s;
  for (const auto& eq : theta) unify_types(sigma, eq.lhs, eq.rhs, s);
  return s;
}

// Substitution composition: bindings of both substitutions hold in the
// result; when both bind the same variable their images are unified and
// folded in.
inline Subst subst_compose(const Subst& s1, const Subst& s2) {
  Subst acc = s1;
  KindCtx empty;
  for (const auto& [v, img] : s2.ty) {
    auto it = acc.ty.find(v);
    if (it != acc.ty.end())
      unify_types(empty, it->second, img, acc);
    else
      detail::extend(acc, v, img);
  }
  for (const auto& [v, img] : s2.res) {
    auto it = acc.res.find(v);
    if (it != acc.res.end())
      unify_resources(empty, it->second, img, acc);
    else
      detail::extend(acc, v, img);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Pattern type synthesis
// ---------------------------------------------------------------------------

namespace infer_detail {

// The kind context only ever grows, so the recursion threads one mutable
// context instead of copying it per judgment.
struct PatternCore {
  TypeEnv bindings;
  TypeConstraint theta;
  DepPtr deps = DepConstraint::top();
};

inline PatternCore synth_pattern_impl(InferSession& session, KindCtx& sigma,
                                      const std::optional<Resource>& res, const MPatternPtr& p,
                                      const MTyPtr& scrutinee_type) {
  switch (p->k) {
    case MPattern::K::Var: {
      PatternCore r;
      if (res)
        r.bindings.push_graded(p->name, scrutinee_type, *res);  // [pVar]
      else
        r.bindings.push_linear(p->name, scrutinee_type);  // pVar
      return r;
    }
    case MPattern::K::Int: {
      // pInt: binds nothing, constrains the scrutinee type to Int.
      PatternCore r;
      r.theta.push_back({scrutinee_type, MTy::integer()});
      return r;
    }
    case MPattern::K::Promote: {
      if (res) throw Error("nested promoted pattern " + pattern_string(p));
      Resource alpha = session.fresh_resvar(sigma);
      MTyPtr beta = session.fresh_tyvar(sigma);
      PatternCore sub = synth_pattern_impl(session, sigma, alpha, p->sub, beta);
      sub.theta.push_back({scrutinee_type, MTy::box(alpha, beta)});
      return sub;
    }
    case MPattern::K::Con: {
      PatternCore out;
      auto recurse = [&](const MPatternPtr& sub, const MTyPtr& expected) {
        PatternCore r = synth_pattern_impl(session, sigma, res, sub, expected);
        for (const auto& a : r.bindings) out.bindings.push(a);
        out.theta.insert(out.theta.end(), r.theta.begin(), r.theta.end());
        out.deps = DepConstraint::conj(out.deps, r.deps);
      };
      switch (p->con) {
        case ConKind::Pair: {
          MTyPtr a1 = session.fresh_tyvar(sigma);
          MTyPtr a2 = session.fresh_tyvar(sigma);
          out.theta.push_back({MTy::pair(a1, a2), scrutinee_type});
          recurse(p->args[0], a1);
          recurse(p->args[1], a2);
          return out;
        }
        case ConKind::Cons: {
          MTyPtr elem = session.fresh_tyvar(sigma);
          out.theta.push_back({MTy::list(elem), scrutinee_type});
          recurse(p->args[0], elem);
          recurse(p->args[1], MTy::list(elem));
          return out;
        }
        case ConKind::Nil: {
          MTyPtr elem = session.fresh_tyvar(sigma);
          out.theta.push_back({MTy::list(elem), scrutinee_type});
          return out;
        }
      }
    }
  }
  throw Error("unreachable pattern kind");
}

}  // namespace infer_detail

// R is "-" at the top level (std::nullopt) and carries the promoted
// pattern's resource inside one.
inline PatternSynthResult synth_pattern(InferSession& session, const KindCtx& sigma,
                                        const std::optional<Resource>& res, const MPatternPtr& p,
                                        const MTyPtr& scrutinee_type) {
  KindCtx working = sigma;
  infer_detail::PatternCore core =
      infer_detail::synth_pattern_impl(session, working, res, p, scrutinee_type);
  return PatternSynthResult{std::move(core.bindings), std::move(working), std::move(core.theta),
                            core.deps};
}

// ---------------------------------------------------------------------------
// Type synthesis
// ---------------------------------------------------------------------------

namespace infer_detail {

struct SynthCore {
  MTyPtr type;
  TypeEnv usage;
  TypeConstraint theta;
  DepPtr deps = DepConstraint::top();
};

inline SynthCore synth_impl(InferSession& session, KindCtx& sigma, const TypeEnv& gamma,
                            const MTermPtr& t) {
  switch (t->k) {
    case MTerm::K::Int:
      return SynthCore{MTy::integer(), TypeEnv{}, {}, DepConstraint::top()};

    case MTerm::K::Var: {
      const Assumption* a = gamma.lookup(t->name);
      if (!a) throw UnboundVariable("unbound variable " + t->name);
      SynthCore r{a->type, TypeEnv{}, {}, DepConstraint::top()};
      if (a->linear())
        r.usage.push_linear(t->name, a->type);  // =>lin
      else
        r.usage.push_graded(t->name, a->type, Resource::unit());  // =>gr, usage x:[A]_1
      return r;
    }

    case MTerm::K::Lam: {
      MTyPtr alpha = session.fresh_tyvar(sigma);
      session.binder_types()[t.get()] = alpha;
      PatternCore pat = synth_pattern_impl(session, sigma, std::nullopt, t->pattern, alpha);
      TypeEnv extended = gamma;
      for (const auto& a : pat.bindings) extended.push(a);
      SynthCore body = synth_impl(session, sigma, extended, t->a);
      std::set<std::string> bound;
      pattern_vars(t->pattern, bound);
      SynthCore out{MTy::arrow(alpha, body.type), body.usage.without(bound), std::move(pat.theta),
                    body.deps};
      out.theta.insert(out.theta.end(), body.theta.begin(), body.theta.end());
      return out;
    }

    case MTerm::K::App: {
      SynthCore f = synth_impl(session, sigma, gamma, t->a);
      SynthCore x = synth_impl(session, sigma, gamma, t->b);
      MTyPtr beta = session.fresh_tyvar(sigma);
      SynthCore out{beta, ctx_concat(f.usage, x.usage), std::move(f.theta),
                    DepConstraint::conj(f.deps, x.deps)};
      out.theta.insert(out.theta.end(), x.theta.begin(), x.theta.end());
      out.theta.push_back({f.type, MTy::arrow(x.type, beta)});
      return out;
    }

    case MTerm::K::Promote: {
      // =>pr: restrict to free variables, grade, synthesize under the
      // graded context, mint alpha, and constrain it below every grade.
      // Variables occurring only under an unversion are excluded from the
      // constraint: their dependencies stop at that boundary.
      TypeEnv restricted = gamma.restricted_to(term_free_vars(t->a));
      TypeEnv graded = grade_context(sigma, restricted);
      SynthCore body = synth_impl(session, sigma, graded, t->a);
      Resource alpha = session.fresh_resvar(sigma);
      DepPtr c2 = gen_var_deps(sigma, alpha.var_name(),
                               graded.restricted_to(constraint_free_vars(t->a)),
                               session.scope());
      return SynthCore{MTy::box(alpha, body.type), ctx_scale(alpha, body.usage),
                       std::move(body.theta), DepConstraint::conj(body.deps, c2)};
    }

    case MTerm::K::Con: {
      SynthCore out{nullptr, TypeEnv{}, {}, DepConstraint::top()};
      std::vector<MTyPtr> arg_tys;
      for (const auto& arg : t->args) {
        SynthCore r = synth_impl(session, sigma, gamma, arg);
        out.usage = ctx_concat(out.usage, r.usage);
        out.theta.insert(out.theta.end(), r.theta.begin(), r.theta.end());
        out.deps = DepConstraint::conj(out.deps, r.deps);
        arg_tys.push_back(r.type);
      }
      switch (t->con) {
        case ConKind::Pair:
          out.type = MTy::pair(arg_tys[0], arg_tys[1]);
          break;
        case ConKind::Cons:
          out.theta.push_back({arg_tys[1], MTy::list(arg_tys[0])});
          out.type = MTy::list(arg_tys[0]);
          break;
        case ConKind::Nil:
          out.type = MTy::list(session.fresh_tyvar(sigma));
          break;
      }
      return out;
    }

    case MTerm::K::Case: {
      SynthCore scrut = synth_impl(session, sigma, gamma, t->a);
      SynthCore out{nullptr, std::move(scrut.usage), std::move(scrut.theta), scrut.deps};
      for (const auto& br : t->branches) {
        PatternCore pat =
            synth_pattern_impl(session, sigma, std::nullopt, br.pattern, scrut.type);
        TypeEnv extended = gamma;
        for (const auto& a : pat.bindings) extended.push(a);
        SynthCore body = synth_impl(session, sigma, extended, br.body);
        std::set<std::string> bound;
        pattern_vars(br.pattern, bound);
        out.usage = ctx_concat(out.usage, body.usage.without(bound));
        out.theta.insert(out.theta.end(), pat.theta.begin(), pat.theta.end());
        out.theta.insert(out.theta.end(), body.theta.begin(), body.theta.end());
        out.deps = DepConstraint::conj(out.deps, body.deps);
        if (!out.type)
          out.type = body.type;  // branch result types all unify with the first
        else
          out.theta.push_back({body.type, out.type});
      }
      if (!out.type) throw Error("case expression with no branches");
      return out;
    }

    case MTerm::K::VerOf: {
      for (const auto& [m, v] : t->label) {
        if (!session.universe().has_module(m) || !session.universe().has_version(m, v))
          throw UnknownLabel("ver-of names unregistered " + m + " = " + v);
      }
      TypeEnv restricted = gamma.restricted_to(term_free_vars(t->a));
      TypeEnv graded = grade_context(sigma, restricted);
      DepPtr c2 = gen_label_deps(sigma, graded.restricted_to(constraint_free_vars(t->a)), t->label);
      SynthCore body = synth_impl(session, sigma, graded, t->a);
      body.deps = DepConstraint::conj(body.deps, c2);
      return body;
    }

    case MTerm::K::Unversion: {
      SynthCore body;
      if (t->a->k == MTerm::K::Promote) {
        // The wrapper promotion inserted by the translation. Its box makes
        // the operand a versioned value but emits no variable dependencies;
        // the fresh resource below discards it anyway, and the operand's
        // own promotions keep its insides consistent.
        TypeEnv restricted = gamma.restricted_to(term_free_vars(t->a->a));
        TypeEnv graded = grade_context(sigma, restricted);
        SynthCore inner_body = synth_impl(session, sigma, graded, t->a->a);
        Resource wrapper = session.fresh_resvar(sigma);
        body = SynthCore{MTy::box(wrapper, inner_body.type),
                         ctx_scale(wrapper, inner_body.usage), std::move(inner_body.theta),
                         inner_body.deps};
      } else {
        body = synth_impl(session, sigma, gamma, t->a);
      }
      MTyPtr inner;
      if (body.type->k == MTy::K::Box) {
        inner = body.type->a;
      } else if (body.type->k == MTy::K::Var) {
        // Local unification: the operand type must refine to a box.
        Resource r = session.fresh_resvar(sigma);
        inner = session.fresh_tyvar(sigma);
        body.theta.push_back({body.type, MTy::box(r, inner)});
      } else {
        throw NotAVersionedValue("unversion applied to a value of type " + ty_string(body.type));
      }
      Resource alpha = session.fresh_resvar(sigma);
      return SynthCore{MTy::box(alpha, inner), std::move(body.usage), std::move(body.theta),
                       body.deps};
    }

    case MTerm::K::BinOp: {
      // Primitive integer operators use their operands linearly, like the
      // function position of an application.
      SynthCore l = synth_impl(session, sigma, gamma, t->a);
      SynthCore r = synth_impl(session, sigma, gamma, t->b);
      SynthCore out{MTy::integer(), ctx_concat(l.usage, r.usage), std::move(l.theta),
                    DepConstraint::conj(l.deps, r.deps)};
      out.theta.insert(out.theta.end(), r.theta.begin(), r.theta.end());
      out.theta.push_back({l.type, MTy::integer()});
      out.theta.push_back({r.type, MTy::integer()});
      return out;
    }
  }
  throw Error("unreachable term kind");
}

}  // namespace infer_detail

inline SynthResult synth_type(InferSession& session, const KindCtx& sigma, const TypeEnv& gamma,
                              const MTermPtr& t) {
  KindCtx working = sigma;
  infer_detail::SynthCore core = infer_detail::synth_impl(session, working, gamma, t);
  return SynthResult{std::move(core.type), std::move(working), std::move(core.usage),
                     std::move(core.theta), core.deps};
}

}  // namespace vl
