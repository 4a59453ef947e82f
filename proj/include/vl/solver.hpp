#pragma once

// Decides dependency constraints over the finite label universe.
//
// Labels are vectors of per-module version choices, so the search works on
// (variable, module) components directly: variable dependencies at the top
// level merge components by union-find over their scope, label dependencies
// pin components, and backtracking assigns the remaining component classes
// in variable-creation order with versions tried newest-first. The first
// solution found is therefore the maximum under the newest-preference
// order. Constraints also export as SMT-LIB2 text; the script is never
// consumed back, the internal solver decides.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vl/vlmini.hpp"

namespace vl {

struct UnknownModule : Error {
  using Error::Error;
};

using Assignment = std::map<std::string, VersionLabel>;

// Ordering used by the newest preference: labels compare lexicographically
// by per-module version index (modules in name order), newest first.
inline bool label_newer(const ModuleRegistry& reg, const VersionLabel& a, const VersionLabel& b) {
  for (const auto& m : reg.names()) {
    int ia = reg.version_index(m, a.version_of(m));
    int ib = reg.version_index(m, b.version_of(m));
    if (ia != ib) return ia > ib;
  }
  return false;
}

// Variable creation order: the numeric suffix of the fresh-name counter,
// which is global to a compilation unit.
inline long var_creation_index(const std::string& name) {
  std::size_t i = name.find_first_of("0123456789");
  if (i == std::string::npos) return -1;
  return std::stol(name.substr(i));
}

inline bool var_order(const std::string& a, const std::string& b) {
  long ia = var_creation_index(a), ib = var_creation_index(b);
  if (ia != ib) return ia < ib;
  return a < b;
}

// True when a beats b: compare variables in the fixed global order, and for
// the first variable whose labels differ prefer the newer label.
inline bool assignment_better(const ModuleRegistry& reg, const Assignment& a,
                              const Assignment& b) {
  std::vector<std::string> vars;
  for (const auto& [v, _] : a) vars.push_back(v);
  std::sort(vars.begin(), vars.end(), var_order);
  for (const auto& v : vars) {
    auto ita = a.find(v), itb = b.find(v);
    if (itb == b.end()) return true;
    if (ita->second == itb->second) continue;
    return label_newer(reg, ita->second, itb->second);
  }
  return false;
}

inline Assignment prefer_newest(const ModuleRegistry& reg,
                                const std::vector<Assignment>& candidates) {
  if (candidates.empty()) throw Error("prefer_newest over an empty candidate set");
  const Assignment* best = &candidates.front();
  for (const auto& c : candidates)
    if (assignment_better(reg, c, *best)) best = &c;
  return *best;
}

// ---------------------------------------------------------------------------
// Evaluation under total and partial assignments
// ---------------------------------------------------------------------------

enum class Tri { True, False, Unknown };

namespace solver_detail {

// Per-(variable, module) component store used during search.
struct ComponentAssignment {
  std::map<std::pair<std::string, ModuleName>, VersionString> comp;

  std::optional<VersionString> get(const std::string& var, const ModuleName& m) const {
    auto it = comp.find({var, m});
    if (it == comp.end()) return std::nullopt;
    return it->second;
  }
};

inline Tri eval_vardep(const DepConstraint& c, const ComponentAssignment& a,
                       const std::vector<ModuleName>& all_modules) {
  const auto& modules = c.scope.empty()
                            ? all_modules
                            : std::vector<ModuleName>(c.scope.begin(), c.scope.end());
  bool unknown = false;
  for (const auto& m : modules) {
    auto x = a.get(c.var, m), y = a.get(c.var2, m);
    if (!x || !y) {
      unknown = true;
      continue;
    }
    if (*x != *y) return Tri::False;
  }
  return unknown ? Tri::Unknown : Tri::True;
}

inline Tri eval_partial(const DepPtr& c, const ComponentAssignment& a,
                        const std::vector<ModuleName>& all_modules) {
  switch (c->k) {
    case DepConstraint::K::Top: return Tri::True;
    case DepConstraint::K::And: {
      Tri l = eval_partial(c->l, a, all_modules), r = eval_partial(c->r, a, all_modules);
      if (l == Tri::False || r == Tri::False) return Tri::False;
      if (l == Tri::Unknown || r == Tri::Unknown) return Tri::Unknown;
      return Tri::True;
    }
    case DepConstraint::K::Or: {
      Tri l = eval_partial(c->l, a, all_modules), r = eval_partial(c->r, a, all_modules);
      if (l == Tri::True || r == Tri::True) return Tri::True;
      if (l == Tri::Unknown || r == Tri::Unknown) return Tri::Unknown;
      return Tri::False;
    }
    case DepConstraint::K::VarDep:
      return eval_vardep(*c, a, all_modules);
    case DepConstraint::K::LabelDep: {
      bool unknown = false;
      for (const auto& [m, v] : c->dep) {
        auto x = a.get(c->var, m);
        if (!x) {
          unknown = true;
          continue;
        }
        if (*x != v) return Tri::False;
      }
      return unknown ? Tri::Unknown : Tri::True;
    }
  }
  return Tri::Unknown;
}

}  // namespace solver_detail

// Evaluates a constraint under a total whole-label assignment.
inline bool eval_total(const DepPtr& c, const Assignment& total) {
  solver_detail::ComponentAssignment comp;
  std::set<ModuleName> modules;
  for (const auto& [var, label] : total)
    for (const auto& [m, v] : label.assignment()) {
      comp.comp[{var, m}] = v;
      modules.insert(m);
    }
  std::vector<ModuleName> all(modules.begin(), modules.end());
  return solver_detail::eval_partial(c, comp, all) == Tri::True;
}

struct SolveResult {
  std::optional<Assignment> assignment;  // nullopt = unsat
  std::vector<DepPtr> unsat_core;        // minimal conjunct subset when unsat

  bool sat() const { return assignment.has_value(); }
};

namespace solver_detail {

inline void top_conjuncts(const DepPtr& c, std::vector<DepPtr>& out) {
  if (c->k == DepConstraint::K::And) {
    top_conjuncts(c->l, out);
    top_conjuncts(c->r, out);
  } else if (c->k != DepConstraint::K::Top) {
    out.push_back(c);
  }
}

// Constraints compiled onto interned (variable, module) components for the
// search: components are dense integers, versions are indices into each
// module's ascending version list.
struct FastNode {
  DepConstraint::K k;
  int l = -1, r = -1;                            // children (And/Or)
  std::vector<std::pair<int, int>> eqs;          // VarDep: component pairs
  std::vector<std::pair<int, int>> pins;         // LabelDep: (component, version index)
};

struct Search {
  const ModuleRegistry& reg;
  std::vector<ModuleName> modules;  // name order
  std::vector<std::string> vars;    // creation order
  int n_modules = 0;

  std::vector<FastNode> nodes;
  int root_node = -1;
  std::vector<int> conjunct_nodes;

  std::vector<int> parent;     // union-find over components
  std::vector<int> forced;     // per root component: version index or -1
  std::vector<std::vector<int>> class_members;
  std::vector<int> class_order;                 // class representative ids
  std::vector<std::vector<int>> touching;       // class id -> conjunct node ids
  std::vector<int> comp_class;                  // component -> class id
  std::vector<int> assignment;                  // component -> version index or -1

  explicit Search(const ModuleRegistry& r) : reg(r), modules(r.names()) {
    n_modules = static_cast<int>(modules.size());
  }

  int comp(int var_idx, int mod_idx) const { return var_idx * n_modules + mod_idx; }

  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[a] = b;
  }

  int module_index(const ModuleName& m) const {
    auto it = std::lower_bound(modules.begin(), modules.end(), m);
    if (it == modules.end() || *it != m) return -1;
    return static_cast<int>(it - modules.begin());
  }

  void check_registered(const PartialLabel& d) const {
    for (const auto& [m, v] : d)
      if (!reg.has_module(m) || !reg.has_version(m, v))
        throw UnknownModule("constraint mentions unregistered " + m + " = " + v);
  }

  int compile(const DepPtr& c, const std::map<std::string, int>& var_idx) {
    FastNode node;
    node.k = c->k;
    switch (c->k) {
      case DepConstraint::K::And:
      case DepConstraint::K::Or: {
        int l = compile(c->l, var_idx);
        int r = compile(c->r, var_idx);
        node.l = l;
        node.r = r;
        break;
      }
      case DepConstraint::K::VarDep: {
        int a = var_idx.at(c->var), b = var_idx.at(c->var2);
        if (c->scope.empty()) {
          for (int m = 0; m < n_modules; ++m) node.eqs.emplace_back(comp(a, m), comp(b, m));
        } else {
          for (const auto& m : c->scope) {
            int mi = module_index(m);
            if (mi < 0)
              throw UnknownModule("dependency scope mentions unregistered module " + m);
            node.eqs.emplace_back(comp(a, mi), comp(b, mi));
          }
        }
        break;
      }
      case DepConstraint::K::LabelDep: {
        check_registered(c->dep);
        int a = var_idx.at(c->var);
        for (const auto& [m, v] : c->dep)
          node.pins.emplace_back(comp(a, module_index(m)), reg.version_index(m, v));
        break;
      }
      case DepConstraint::K::Top:
        break;
    }
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size()) - 1;
  }

  Tri eval(int ni) const {
    const FastNode& n = nodes[ni];
    switch (n.k) {
      case DepConstraint::K::Top: return Tri::True;
      case DepConstraint::K::And: {
        Tri l = eval(n.l), r = eval(n.r);
        if (l == Tri::False || r == Tri::False) return Tri::False;
        if (l == Tri::Unknown || r == Tri::Unknown) return Tri::Unknown;
        return Tri::True;
      }
      case DepConstraint::K::Or: {
        Tri l = eval(n.l);
        if (l == Tri::True) return Tri::True;
        Tri r = eval(n.r);
        if (r == Tri::True) return Tri::True;
        if (l == Tri::Unknown || r == Tri::Unknown) return Tri::Unknown;
        return Tri::False;
      }
      case DepConstraint::K::VarDep: {
        bool unknown = false;
        for (const auto& [x, y] : n.eqs) {
          int a = assignment[x], b = assignment[y];
          if (a < 0 || b < 0) {
            unknown = true;
            continue;
          }
          if (a != b) return Tri::False;
        }
        return unknown ? Tri::Unknown : Tri::True;
      }
      case DepConstraint::K::LabelDep: {
        bool unknown = false;
        for (const auto& [x, v] : n.pins) {
          int a = assignment[x];
          if (a < 0) {
            unknown = true;
            continue;
          }
          if (a != v) return Tri::False;
        }
        return unknown ? Tri::Unknown : Tri::True;
      }
    }
    return Tri::Unknown;
  }

  void node_classes(int ni, std::set<int>& out) {
    const FastNode& n = nodes[ni];
    if (n.l >= 0) node_classes(n.l, out);
    if (n.r >= 0) node_classes(n.r, out);
    for (const auto& [x, y] : n.eqs) {
      out.insert(comp_class[x]);
      out.insert(comp_class[y]);
    }
    for (const auto& [x, v] : n.pins) out.insert(comp_class[x]);
  }

  bool prepare(const DepPtr& c, const std::set<std::string>& extra_vars) {
    std::set<std::string> var_set(extra_vars);
    constraint_vars(c, var_set);
    vars.assign(var_set.begin(), var_set.end());
    std::sort(vars.begin(), vars.end(), var_order);
    std::map<std::string, int> var_idx;
    for (std::size_t i = 0; i < vars.size(); ++i) var_idx[vars[i]] = static_cast<int>(i);

    int n_comp = static_cast<int>(vars.size()) * n_modules;
    parent.resize(n_comp);
    for (int i = 0; i < n_comp; ++i) parent[i] = i;
    assignment.assign(n_comp, -1);

    root_node = compile(c, var_idx);
    std::vector<int> tops;
    {
      std::vector<int> work{root_node};
      while (!work.empty()) {
        int ni = work.back();
        work.pop_back();
        if (nodes[ni].k == DepConstraint::K::And) {
          work.push_back(nodes[ni].l);
          work.push_back(nodes[ni].r);
        } else if (nodes[ni].k != DepConstraint::K::Top) {
          tops.push_back(ni);
        }
      }
    }
    conjunct_nodes = std::move(tops);

    // Unit propagation over the forced (top-level) atoms.
    for (int ni : conjunct_nodes)
      if (nodes[ni].k == DepConstraint::K::VarDep)
        for (const auto& [x, y] : nodes[ni].eqs) unite(x, y);

    forced.assign(n_comp, -1);
    for (int ni : conjunct_nodes) {
      if (nodes[ni].k != DepConstraint::K::LabelDep) continue;
      for (const auto& [x, v] : nodes[ni].pins) {
        int root = find(x);
        if (forced[root] >= 0 && forced[root] != v) return false;  // contradictory components
        forced[root] = v;
      }
    }

    // Classes in component order = (variable creation order, module order),
    // which mirrors the newest-preference order.
    comp_class.assign(n_comp, -1);
    for (int i = 0; i < n_comp; ++i) {
      int root = find(i);
      if (comp_class[root] < 0) {
        comp_class[root] = static_cast<int>(class_order.size());
        class_order.push_back(root);
        class_members.emplace_back();
      }
      comp_class[i] = comp_class[root];
      class_members[comp_class[i]].push_back(i);
    }

    touching.assign(class_order.size(), {});
    for (int ni : conjunct_nodes) {
      std::set<int> cls;
      node_classes(ni, cls);
      for (int cid : cls) touching[cid].push_back(ni);
    }
    return true;
  }

  bool dfs(std::size_t i) {
    if (i == class_order.size()) return eval(root_node) == Tri::True;
    int cid = static_cast<int>(i);
    int root = class_order[i];
    int mod = class_members[cid].front() % n_modules;  // one module per class
    int nv = static_cast<int>(reg.versions(modules[mod]).size());

    for (int v = nv - 1; v >= 0; --v) {  // newest first
      if (forced[root] >= 0 && forced[root] != v) continue;
      for (int x : class_members[cid]) assignment[x] = v;
      bool viable = true;
      for (int ni : touching[cid])
        if (eval(ni) == Tri::False) {
          viable = false;
          break;
        }
      if (viable && dfs(i + 1)) return true;
      for (int x : class_members[cid]) assignment[x] = -1;
    }
    return false;
  }
};

inline bool solvable(const DepPtr& c, const ModuleRegistry& reg,
                     const std::set<std::string>& extra_vars, Assignment& out) {
  if (reg.empty()) throw EmptyRegistry("solving requires a non-empty registry");
  Search s(reg);
  if (!s.prepare(c, extra_vars)) return false;
  if (!s.dfs(0)) return false;
  for (std::size_t vi = 0; vi < s.vars.size(); ++vi) {
    std::map<ModuleName, VersionString> label;
    for (int m = 0; m < s.n_modules; ++m) {
      int ver = s.assignment[s.comp(static_cast<int>(vi), m)];
      label[s.modules[m]] = reg.versions(s.modules[m])[ver];
    }
    out.insert({s.vars[vi], VersionLabel(std::move(label))});
  }
  return true;
}

}  // namespace solver_detail

// Solves c over the registry's label universe. extra_vars join the search
// even when the constraint itself never mentions them (they get the newest
// label). On unsat, the core is a minimal subset of top-level conjuncts
// that is still unsatisfiable, found by greedy deletion.
inline SolveResult solve(const DepPtr& c, const ModuleRegistry& reg,
                         const std::set<std::string>& extra_vars = {}) {
  if (reg.empty()) throw EmptyRegistry("solving requires a non-empty registry");
  SolveResult result;
  Assignment a;
  if (solver_detail::solvable(c, reg, extra_vars, a)) {
    result.assignment = std::move(a);
    return result;
  }

  std::vector<DepPtr> core;
  solver_detail::top_conjuncts(c, core);
  for (std::size_t i = 0; i < core.size();) {
    std::vector<DepPtr> trial;
    for (std::size_t j = 0; j < core.size(); ++j)
      if (j != i) trial.push_back(core[j]);
    DepPtr conj = DepConstraint::top();
    for (const auto& p : trial) conj = DepConstraint::conj(conj, p);
    Assignment ignore;
    if (!solver_detail::solvable(conj, reg, {}, ignore)) {
      core = std::move(trial);  // still unsat without it; drop for good
    } else {
      ++i;
    }
  }
  result.unsat_core = std::move(core);
  return result;
}

// ---------------------------------------------------------------------------
// SMT-LIB2 export
// ---------------------------------------------------------------------------

namespace solver_detail {

inline std::string smt_var(const std::string& var, const ModuleName& m) {
  std::string out = var + "_" + m;
  for (char& c : out)
    if (!isalnum(static_cast<unsigned char>(c))) c = '_';
  return out;
}

inline std::string smt_formula(const DepPtr& c, const ModuleRegistry& reg) {
  switch (c->k) {
    case DepConstraint::K::Top: return "true";
    case DepConstraint::K::And:
      return "(and " + smt_formula(c->l, reg) + " " + smt_formula(c->r, reg) + ")";
    case DepConstraint::K::Or:
      return "(or " + smt_formula(c->l, reg) + " " + smt_formula(c->r, reg) + ")";
    case DepConstraint::K::VarDep: {
      std::string out = "(and";
      const auto names = reg.names();
      const auto& modules =
          c->scope.empty() ? names : std::vector<ModuleName>(c->scope.begin(), c->scope.end());
      for (const auto& m : modules)
        out += " (= " + smt_var(c->var, m) + " " + smt_var(c->var2, m) + ")";
      return out + ")";
    }
    case DepConstraint::K::LabelDep: {
      std::string out = "(and";
      for (const auto& [m, v] : c->dep)
        out += " (= " + smt_var(c->var, m) + " " + std::to_string(reg.version_index(m, v)) + ")";
      return out + ")";
    }
  }
  return "true";
}

}  // namespace solver_detail

// One integer per (variable, module) pair, bounded by that module's version
// count; dependencies become component equalities.
inline std::string export_smt2(const DepPtr& c, const ModuleRegistry& reg) {
  std::set<std::string> vars;
  constraint_vars(c, vars);
  std::ostringstream out;
  out << "(set-logic QF_LIA)\n";
  for (const auto& v : vars) {
    for (const auto& m : reg.names()) {
      std::string sv = solver_detail::smt_var(v, m);
      out << "(declare-const " << sv << " Int)\n";
      out << "(assert (and (>= " << sv << " 0) (<= " << sv << " "
          << reg.versions(m).size() - 1 << ")))\n";
    }
  }
  out << "(assert " << solver_detail::smt_formula(c, reg) << ")\n";
  out << "(check-sat)\n(get-model)\n";
  return out.str();
}

}  // namespace vl
