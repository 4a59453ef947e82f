#pragma once

// Bundling: consolidates the per-version inferred interfaces of a module
// into one multi-version interface. Symbols that erase to the same simple
// type become one entry whose constraint disjoins over the defining
// versions; each disjunct pins the entry's outer resource variable to its
// version and pairs the remaining fresh variables with that version's
// interface variables, box position by box position.

#include <map>
#include <string>
#include <vector>

#include "vl/infer.hpp"
#include "vl/vlmini.hpp"

namespace vl {

struct ErasedTypeMismatch : Error {
  using Error::Error;
};

struct InterfaceEntry {
  MTyPtr type;
  DepPtr constraint;
};

struct VersionedInterface {
  ModuleName module;
  VersionString version;
  std::vector<std::pair<std::string, InterfaceEntry>> entries;  // definition order

  const InterfaceEntry* find(const std::string& symbol) const {
    for (const auto& [s, e] : entries)
      if (s == symbol) return &e;
    return nullptr;
  }
};

struct BundledInterface {
  ModuleName module;
  std::vector<std::pair<std::string, InterfaceEntry>> entries;

  const InterfaceEntry* find(const std::string& symbol) const {
    for (const auto& [s, e] : entries)
      if (s == symbol) return &e;
    return nullptr;
  }
};

// Erases every box layer, leaving the simple type skeleton.
inline MTyPtr erase_boxes(const MTyPtr& t) {
  switch (t->k) {
    case MTy::K::Int:
    case MTy::K::Var:
      return t;
    case MTy::K::Box: return erase_boxes(t->a);
    case MTy::K::Arrow: return MTy::arrow(erase_boxes(t->a), erase_boxes(t->b));
    case MTy::K::Pair: return MTy::pair(erase_boxes(t->a), erase_boxes(t->b));
    case MTy::K::List: return MTy::list(erase_boxes(t->a));
  }
  return t;
}

namespace bundle_detail {

// Renames type variables in first-traversal order so interfaces inferred
// in different sessions compare structurally.
inline MTyPtr canonicalize_vars(const MTyPtr& t, std::map<std::string, MTyPtr>& seen) {
  switch (t->k) {
    case MTy::K::Int: return t;
    case MTy::K::Var: {
      auto it = seen.find(t->var);
      if (it == seen.end())
        it = seen.emplace(t->var, MTy::tyvar("c" + std::to_string(seen.size()))).first;
      return it->second;
    }
    case MTy::K::Box: return MTy::box(t->res, canonicalize_vars(t->a, seen));
    case MTy::K::Arrow:
      return MTy::arrow(canonicalize_vars(t->a, seen), canonicalize_vars(t->b, seen));
    case MTy::K::Pair:
      return MTy::pair(canonicalize_vars(t->a, seen), canonicalize_vars(t->b, seen));
    case MTy::K::List: return MTy::list(canonicalize_vars(t->a, seen));
  }
  return t;
}

// Fresh-boxes the erased skeleton the way the translation types it: every
// arrow domain boxed, fresh type variables at variable positions.
inline MTyPtr rebox(InferSession& session, KindCtx& sigma, const MTyPtr& erased,
                    bool domain_position) {
  MTyPtr core;
  switch (erased->k) {
    case MTy::K::Int: core = erased; break;
    case MTy::K::Var: core = session.fresh_tyvar(sigma); break;
    case MTy::K::Arrow:
      core = MTy::arrow(rebox(session, sigma, erased->a, true),
                        rebox(session, sigma, erased->b, false));
      break;
    case MTy::K::Pair:
      core = MTy::pair(rebox(session, sigma, erased->a, false),
                       rebox(session, sigma, erased->b, false));
      break;
    case MTy::K::List:
      core = MTy::list(rebox(session, sigma, erased->a, false));
      break;
    case MTy::K::Box:
      throw Error("erased type still contains a box");
  }
  if (domain_position) return MTy::box(session.fresh_resvar(sigma), core);
  return core;
}

// Box resources of a type in leftmost-innermost traversal order.
inline void box_vars(const MTyPtr& t, std::vector<Resource>& out) {
  switch (t->k) {
    case MTy::K::Box:
      out.push_back(t->res);
      box_vars(t->a, out);
      return;
    case MTy::K::Arrow:
    case MTy::K::Pair:
      box_vars(t->a, out);
      box_vars(t->b, out);
      return;
    case MTy::K::List:
      box_vars(t->a, out);
      return;
    default:
      return;
  }
}

// Pairs the bundled type's fresh box variables with the version type's box
// variables position by position; positions where only one side has a box
// (e.g. an extra box from an unversion-shaped definition) pair nothing.
inline void pair_boxes(const MTyPtr& bundled, const MTyPtr& version,
                       std::vector<std::pair<std::string, std::string>>& out) {
  const MTyPtr* b = &bundled;
  const MTyPtr* v = &version;
  while ((*v)->k == MTy::K::Box && (*b)->k != MTy::K::Box) v = &(*v)->a;
  while ((*b)->k == MTy::K::Box && (*v)->k != MTy::K::Box) b = &(*b)->a;
  if ((*b)->k == MTy::K::Box && (*v)->k == MTy::K::Box) {
    if ((*b)->res.is_var() && (*v)->res.is_var())
      out.emplace_back((*b)->res.var_name(), (*v)->res.var_name());
    pair_boxes((*b)->a, (*v)->a, out);
    return;
  }
  if ((*b)->k != (*v)->k) return;
  switch ((*b)->k) {
    case MTy::K::Arrow:
    case MTy::K::Pair:
      pair_boxes((*b)->a, (*v)->a, out);
      pair_boxes((*b)->b, (*v)->b, out);
      return;
    case MTy::K::List:
      pair_boxes((*b)->a, (*v)->a, out);
      return;
    default:
      return;
  }
}

}  // namespace bundle_detail

// True iff both types erase to the same simple type (up to renaming of
// residual type variables).
inline bool erased_equal(const MTyPtr& a, const MTyPtr& b) {
  std::map<std::string, MTyPtr> sa, sb;
  return ty_equal(bundle_detail::canonicalize_vars(erase_boxes(a), sa),
                  bundle_detail::canonicalize_vars(erase_boxes(b), sb));
}

struct BundleResult {
  BundledInterface iface;
  DepPtr retained;  // per-version constraints, conjoined and kept globally
};

// `scope` is the module's own label universe plus the module itself: the
// disjunct edges relate the importer's fresh variables to this module's
// version interfaces, so they range over exactly those components.
inline BundleResult bundle(InferSession& session, KindCtx& sigma,
                           const ModuleName& module,
                           const std::vector<VersionedInterface>& interfaces,
                           std::set<ModuleName> scope = {}) {
  if (scope.empty()) {
    scope = std::set<ModuleName>(session.scope());
    scope.insert(module);
  }
  if (interfaces.empty()) throw Error("bundle of zero interfaces for " + module);
  BundleResult out;
  out.iface.module = module;
  out.retained = DepConstraint::top();

  // Symbol order: first appearance across version-ascending interfaces.
  std::vector<std::string> symbols;
  for (const auto& vi : interfaces)
    for (const auto& [s, _] : vi.entries)
      if (std::find(symbols.begin(), symbols.end(), s) == symbols.end()) symbols.push_back(s);

  for (const auto& vi : interfaces)
    for (const auto& [s, e] : vi.entries) out.retained = DepConstraint::conj(out.retained, e.constraint);

  for (const auto& symbol : symbols) {
    std::vector<const VersionedInterface*> defining;
    for (const auto& vi : interfaces)
      if (vi.find(symbol)) defining.push_back(&vi);

    const MTyPtr& first_ty = defining.front()->find(symbol)->type;
    for (const auto* vi : defining) {
      if (!erased_equal(first_ty, vi->find(symbol)->type))
        throw ErasedTypeMismatch("symbol " + symbol + " of " + module +
                                 " has incompatible types across versions " +
                                 defining.front()->version + " and " + vi->version +
                                 " (erase to " + ty_string(erase_boxes(first_ty)) + " vs " +
                                 ty_string(erase_boxes(vi->find(symbol)->type)) + ")");
    }

    // The bundled type: the erased skeleton re-boxed with fresh variables,
    // plus the outer box naming the symbol's own version resource.
    MTyPtr inner = bundle_detail::rebox(session, sigma, erase_boxes(first_ty), false);
    Resource outer = session.fresh_resvar(sigma);
    MTyPtr bundled_ty = MTy::box(outer, inner);

    DepPtr disjunction;
    for (const auto* vi : defining) {
      const InterfaceEntry* entry = vi->find(symbol);
      DepPtr disjunct = DepConstraint::label_dep(
          outer.var_name(), PartialLabel{{module, vi->version}},
          symbol + " requires " + module + " = " + vi->version);
      std::vector<std::pair<std::string, std::string>> pairs;
      bundle_detail::pair_boxes(bundled_ty, entry->type, pairs);
      for (const auto& [fresh, orig] : pairs)
        disjunct = DepConstraint::conj(disjunct, DepConstraint::var_dep(fresh, orig, scope));
      disjunction = disjunction ? DepConstraint::disj(disjunction, disjunct) : disjunct;
    }
    out.iface.entries.emplace_back(symbol, InterfaceEntry{bundled_ty, disjunction});
  }
  return out;
}

// Counts the disjuncts of a bundled entry's constraint.
inline std::size_t disjunct_count(const DepPtr& c) {
  if (c->k == DepConstraint::K::Or) return disjunct_count(c->l) + disjunct_count(c->r);
  return 1;
}

inline std::string interface_string(const BundledInterface& b) {
  std::string out;
  for (const auto& [s, e] : b.entries)
    out += s + " : " + ty_string(e.type) + " | " + constraint_string(e.constraint) + "\n";
  return out;
}

}  // namespace vl
