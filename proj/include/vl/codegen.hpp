#pragma once

// Version specialization. Duplication runs before inference and gives each
// occurrence of an imported symbol its own name plus a fresh copy of the
// bundled interface entry, so homonymous occurrences can resolve to
// different versions. After solving, specialization rewires every
// occurrence to the definition from its assigned version, pulls in the
// needed definitions transitively, and erases the coeffect structure via
// the reverse Girard translation.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "vl/bundle.hpp"
#include "vl/girard.hpp"
#include "vl/solver.hpp"

namespace vl {

struct MissingDefinition : Error {
  using Error::Error;
};
struct AmbiguousImport : Error {
  using Error::Error;
};

struct OccMeta {
  std::string original;   // the imported symbol this occurrence renames
  ModuleName home;        // the module that exports it
  std::string outer_var;  // the clone's outer resource variable
};

struct DupResult {
  MTermPtr term;
  std::map<std::string, OccMeta> occurrences;  // fresh name -> origin
  TypeEnv context;                             // graded assumptions for the clones
  DepPtr clone_constraints = DepConstraint::top();
};

namespace codegen_detail {

// Freshens the variables the bundling minted for this entry (those in its
// type). The per-version interface variables referenced by the disjuncts
// stay shared: they are what connects an occurrence to the constraints of
// whichever version it resolves to.
inline Subst freshen_entry(InferSession& session, KindCtx& sigma, const InterfaceEntry& entry) {
  std::set<std::string> tyvars, resvars;
  ty_free_vars(entry.type, tyvars, resvars);
  Subst rename;
  for (const auto& v : tyvars) rename.ty[v] = session.fresh_tyvar(sigma);
  for (const auto& v : resvars) rename.res.insert({v, session.fresh_resvar(sigma)});
  return rename;
}

inline MTermPtr rename_occurrences(const MTermPtr& t, const std::set<std::string>& bound,
                                   const std::function<MTermPtr(const std::string&)>& on_var) {
  switch (t->k) {
    case MTerm::K::Int: return t;
    case MTerm::K::Var: {
      if (bound.count(t->name)) return t;
      MTermPtr replacement = on_var(t->name);
      return replacement ? replacement : t;
    }
    case MTerm::K::Lam: {
      std::set<std::string> inner = bound;
      pattern_vars(t->pattern, inner);
      return MTerm::lam(t->pattern, rename_occurrences(t->a, inner, on_var));
    }
    case MTerm::K::App:
      return MTerm::app(rename_occurrences(t->a, bound, on_var),
                        rename_occurrences(t->b, bound, on_var));
    case MTerm::K::Promote:
      return MTerm::promote(rename_occurrences(t->a, bound, on_var));
    case MTerm::K::Con: {
      std::vector<MTermPtr> args;
      for (const auto& a : t->args) args.push_back(rename_occurrences(a, bound, on_var));
      return MTerm::make_con(t->con, std::move(args));
    }
    case MTerm::K::Case: {
      std::vector<MBranch> branches;
      for (const auto& br : t->branches) {
        std::set<std::string> inner = bound;
        pattern_vars(br.pattern, inner);
        branches.push_back(MBranch{br.pattern, rename_occurrences(br.body, inner, on_var)});
      }
      return MTerm::case_of(rename_occurrences(t->a, bound, on_var), std::move(branches));
    }
    case MTerm::K::VerOf:
      return MTerm::ver_of(t->label, rename_occurrences(t->a, bound, on_var));
    case MTerm::K::Unversion:
      return MTerm::unversion(rename_occurrences(t->a, bound, on_var));
    case MTerm::K::BinOp:
      return MTerm::binop(t->op, rename_occurrences(t->a, bound, on_var),
                          rename_occurrences(t->b, bound, on_var));
  }
  return t;
}

}  // namespace codegen_detail

// Renames every free occurrence of an imported symbol to a fresh unique
// name and clones the bundled entry (type and constraint) per occurrence
// with freshly renamed resource variables.
inline DupResult duplicate_externals(InferSession& session, KindCtx& sigma, const MTermPtr& t,
                                     const std::map<ModuleName, BundledInterface>& imports) {
  std::map<std::string, std::pair<ModuleName, const InterfaceEntry*>> exported;
  for (const auto& [mod, iface] : imports) {
    for (const auto& [sym, entry] : iface.entries) {
      if (exported.count(sym))
        throw AmbiguousImport("symbol " + sym + " exported by both " + exported[sym].first +
                              " and " + mod);
      exported[sym] = {mod, &entry};
    }
  }

  DupResult out;
  int occurrence = 0;
  out.term = codegen_detail::rename_occurrences(
      t, {}, [&](const std::string& name) -> MTermPtr {
        auto it = exported.find(name);
        if (it == exported.end()) return nullptr;
        const auto& [home, entry] = it->second;
        std::string fresh = name + "#" + std::to_string(occurrence++);
        Subst rename = codegen_detail::freshen_entry(session, sigma, *entry);
        MTyPtr clone_ty = apply_subst(rename, entry->type);
        DepPtr clone_c = apply_subst(rename, entry->constraint);
        out.occurrences[fresh] = OccMeta{name, home, clone_ty->res.var_name()};
        out.context.push_graded(fresh, clone_ty->a, clone_ty->res);
        out.clone_constraints = DepConstraint::conj(out.clone_constraints, clone_c);
        return MTerm::var(fresh);
      });
  return out;
}

// ---------------------------------------------------------------------------
// Specialization
// ---------------------------------------------------------------------------

struct DefRecord {
  ModuleName module;
  VersionString version;
  std::string symbol;
  MTermPtr duplicated;  // body after translation and duplication
  std::map<std::string, OccMeta> occurrences;
  MTyPtr type;
  DepPtr constraint;
};

struct SpecializedProgram {
  std::vector<std::pair<std::string, STermPtr>> defs;  // mangled, dependency order
  std::string entry;

  const STermPtr* find(const std::string& mangled) const {
    for (const auto& [s, b] : defs)
      if (s == mangled) return &b;
    return nullptr;
  }
};

inline std::string mangle(const std::string& symbol, const ModuleName& m,
                          const VersionString& v) {
  std::string ver = v;
  for (char& c : ver)
    if (c == '.') c = '_';
  return symbol + "__" + m + "__" + ver;
}

class Specializer {
 public:
  using RecordKey = std::tuple<ModuleName, VersionString, std::string>;

  Specializer(const std::map<RecordKey, DefRecord>& records, const Assignment& solution)
      : records_(records), solution_(solution) {}

  SpecializedProgram run(const ModuleName& m, const VersionString& v, const std::string& symbol) {
    program_.defs.clear();
    emitted_.clear();
    program_.entry = emit(m, v, symbol);
    return program_;
  }

 private:
  const std::map<RecordKey, DefRecord>& records_;
  const Assignment& solution_;
  SpecializedProgram program_;
  std::set<std::string> emitted_;

  std::string emit(const ModuleName& m, const VersionString& v, const std::string& symbol) {
    std::string name = mangle(symbol, m, v);
    if (emitted_.count(name)) return name;
    emitted_.insert(name);  // acyclic by repository validation

    auto it = records_.find({m, v, symbol});
    if (it == records_.end())
      throw MissingDefinition("no definition of " + symbol + " in " + m + " " + v);
    const DefRecord& rec = it->second;

    MTermPtr rewired = codegen_detail::rename_occurrences(
        rec.duplicated, {}, [&](const std::string& ref) -> MTermPtr {
          auto occ = rec.occurrences.find(ref);
          if (occ != rec.occurrences.end()) {
            auto label = solution_.find(occ->second.outer_var);
            if (label == solution_.end())
              throw ResidualVariable("occurrence " + ref + " has unsolved resource " +
                                     occ->second.outer_var);
            const VersionString& ver = label->second.version_of(occ->second.home);
            return MTerm::var(emit(occ->second.home, ver, occ->second.original));
          }
          if (records_.count({m, v, ref}))  // same-module reference
            return MTerm::var(emit(m, v, ref));
          return nullptr;
        });

    // The record holds the promoted interface term; drop the outer box and
    // erase the rest of the coeffect structure.
    MTermPtr body = rewired->k == MTerm::K::Promote ? rewired->a : rewired;
    program_.defs.emplace_back(name, reverse_translate(body));
    return name;
  }
};

// Renders a specialized program back as a loadable module.
inline std::string specialized_source(const SpecializedProgram& p, const std::string& module_name) {
  std::string out = "module " + module_name + " where\n";
  for (const auto& [name, body] : p.defs) out += name + " = " + term_string(body) + "\n";
  return out;
}

}  // namespace vl
