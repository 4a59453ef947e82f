#pragma once

// The compilation pipeline: load -> translate -> duplicate -> infer ->
// bundle -> solve -> specialize -> run. Modules are processed from the
// leaves of the import DAG; one inference session (one fresh-name counter)
// spans the whole unit, so runs are deterministic. Solving happens once,
// for the entry module, over the conjunction of every retained constraint.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vl/bundle.hpp"
#include "vl/codegen.hpp"
#include "vl/eval.hpp"
#include "vl/girard.hpp"
#include "vl/infer.hpp"
#include "vl/repo.hpp"
#include "vl/solver.hpp"

namespace vl {

struct VersionInconsistency : Error {
  VersionInconsistency(std::string msg, std::vector<DepPtr> core)
      : Error(std::move(msg)), core(std::move(core)) {}
  std::vector<DepPtr> core;
};

struct DefDump {
  ModuleName module;
  VersionString version;
  std::string symbol;
  TypeConstraint theta;
  DepPtr deps;
};

struct CompiledUnit {
  ModuleName entry;
  VersionString entry_version;
  ModuleRegistry universe;  // the entry's external modules; empty if none
  InferSession session;
  KindCtx sigma;
  std::map<ModuleName, BundledInterface> bundled;
  std::map<Specializer::RecordKey, DefRecord> records;
  std::vector<DefDump> dumps;
  DepPtr constraint = DepConstraint::top();
  Assignment solution;
  double solve_ms = 0.0;
};

namespace driver_detail {

// Renders the conflicting label dependencies of an unsat core, naming the
// modules and versions involved.
inline std::string render_conflict(const std::vector<DepPtr>& core) {
  std::map<ModuleName, std::map<VersionString, std::set<std::string>>> demands;
  std::function<void(const DepPtr&)> walk = [&](const DepPtr& c) {
    if (c->k == DepConstraint::K::LabelDep) {
      for (const auto& [m, v] : c->dep) demands[m][v].insert(c->note);
    }
    if (c->l) walk(c->l);
    if (c->r) walk(c->r);
  };
  for (const auto& c : core) walk(c);

  for (const auto& [m, versions] : demands) {
    if (versions.size() < 2) continue;
    std::string msg = "version inconsistency: module " + m + " is required at ";
    bool first = true;
    for (const auto& [v, notes] : versions) {
      if (!first) msg += " and at ";
      msg += partial_label_string({{m, v}});
      std::string who;
      for (const auto& n : notes) {
        if (n.empty()) continue;
        if (!who.empty()) who += ", ";
        who += n;
      }
      if (!who.empty()) msg += " (" + who + ")";
      first = false;
    }
    return msg;
  }
  std::string msg = "version constraints are unsatisfiable; conflicting requirements:";
  for (const auto& c : core) msg += "\n  " + constraint_string(c);
  return msg;
}

}  // namespace driver_detail

// Infers, bundles, and solves everything the entry module needs.
// `entry_version` defaults to the newest registered version.
inline CompiledUnit compile_unit(const Repository& repo, const ModuleName& entry,
                                 std::optional<VersionString> entry_version = std::nullopt) {
  if (!repo.registry.has_module(entry)) throw Error("unknown entry module " + entry);
  CompiledUnit unit;
  unit.entry = entry;
  unit.entry_version = entry_version.value_or(repo.registry.versions(entry).back());

  std::set<ModuleName> needed = repo.transitive_imports(entry);
  unit.universe = repo.registry.restricted_to(needed);

  DepPtr retained = DepConstraint::top();
  for (const auto& m : repo.topo_order) {
    if (m != entry && !needed.count(m)) continue;

    unit.session.set_universe(repo.registry.restricted_to(repo.transitive_imports(m)));
    std::map<ModuleName, BundledInterface> imports;
    for (const auto& imp : repo.imports_of(m)) imports[imp] = unit.bundled.at(imp);

    std::vector<VersionedInterface> interfaces;
    for (const auto& v : repo.registry.versions(m)) {
      const SurfaceModule& mod = repo.at(m, v);
      VersionedInterface vi{m, v, {}};
      TypeEnv module_env;  // earlier definitions of this module version
      for (const auto& def : mod.defs) {
        MTermPtr promoted = forward_translate_promoted(def.body);
        DupResult dup = duplicate_externals(unit.session, unit.sigma, promoted, imports);
        TypeEnv env = dup.context;
        for (const auto& a : module_env) env.push(a);

        infer_detail::SynthCore res =
            infer_detail::synth_impl(unit.session, unit.sigma, env, dup.term);
        Subst theta = unify(unit.sigma, res.theta);
        MTyPtr ty = apply_subst(theta, res.type);
        DepPtr deps =
            apply_subst(theta, DepConstraint::conj(res.deps, dup.clone_constraints));

        unit.dumps.push_back(DefDump{m, v, def.symbol, res.theta, deps});
        unit.records[{m, v, def.symbol}] =
            DefRecord{m, v, def.symbol, dup.term, dup.occurrences, ty, deps};
        vi.entries.emplace_back(def.symbol, InterfaceEntry{ty, deps});
        if (ty->k != MTy::K::Box || !ty->res.is_var())
          throw Error("interface type of " + def.symbol + " is not an outer-boxed type");
        module_env.push_graded(def.symbol, ty->a, ty->res);
      }
      interfaces.push_back(std::move(vi));
    }

    if (m == entry) {
      for (const auto& [sym, e] : interfaces.back().entries) (void)sym;
      for (const auto& vi : interfaces) {
        if (vi.version != unit.entry_version) continue;
        for (const auto& [sym, e] : vi.entries)
          retained = DepConstraint::conj(retained, e.constraint);
      }
    } else {
      BundleResult b = bundle(unit.session, unit.sigma, m, interfaces);
      retained = DepConstraint::conj(retained, b.retained);
      for (const auto& [sym, e] : b.iface.entries)
        retained = DepConstraint::conj(retained, e.constraint);
      unit.bundled[m] = std::move(b.iface);
    }
  }
  unit.constraint = retained;

  if (!needed.empty()) {
    auto t0 = std::chrono::steady_clock::now();
    SolveResult s = solve(unit.constraint, unit.universe);
    auto t1 = std::chrono::steady_clock::now();
    unit.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (!s.sat())
      throw VersionInconsistency(driver_detail::render_conflict(s.unsat_core), s.unsat_core);
    unit.solution = std::move(*s.assignment);
  }
  return unit;
}

inline SpecializedProgram specialize_entry(const CompiledUnit& unit,
                                           const std::string& symbol = "main") {
  Specializer sp(unit.records, unit.solution);
  return sp.run(unit.entry, unit.entry_version, symbol);
}

inline STermPtr run_entry(const CompiledUnit& unit, const std::string& symbol = "main",
                          long fuel = 1000000) {
  SpecializedProgram prog = specialize_entry(unit, symbol);
  std::map<std::string, STermPtr> globals(prog.defs.begin(), prog.defs.end());
  SurfaceEvaluator ev(std::move(globals), fuel);
  return ev.force(STerm::var(prog.entry));
}

// ---------------------------------------------------------------------------
// Emit modes
// ---------------------------------------------------------------------------

inline std::string emit_constraints(const CompiledUnit& unit) {
  std::string out;
  for (const auto& d : unit.dumps) {
    out += "-- " + d.module + " " + d.version + " " + d.symbol + "\n";
    for (const auto& eq : d.theta)
      out += "{" + ty_string(eq.lhs) + " ∼ " + ty_string(eq.rhs) + "}\n";
    std::function<void(const DepPtr&)> lines = [&](const DepPtr& c) {
      if (c->k == DepConstraint::K::And) {
        lines(c->l);
        lines(c->r);
      } else if (c->k != DepConstraint::K::Top) {
        out += constraint_string(c) + "\n";
      }
    };
    lines(d.deps);
  }
  return out;
}

inline std::string emit_interfaces(const CompiledUnit& unit) {
  std::string out;
  for (const auto& [m, iface] : unit.bundled) {
    out += "-- bundled " + m + "\n";
    out += interface_string(iface);
  }
  return out;
}

inline std::string emit_smt2(const CompiledUnit& unit) {
  if (unit.universe.empty()) return "(set-logic QF_LIA)\n(assert true)\n(check-sat)\n(get-model)\n";
  return export_smt2(unit.constraint, unit.universe);
}

// ---------------------------------------------------------------------------
// Scaling benchmark (duplicated-List workload)
// ---------------------------------------------------------------------------

// Writes one module version's source: a port of small list helpers over
// bounded vectors, with symbols suffixed by the module name.
inline std::string bench_module_source(const std::string& mod) {
  std::string s = "_" + mod;
  std::string out = "module " + mod + " where\n";
  out += "head" + s + " xs = case xs of { [] -> 0; h : t -> h }\n";
  out += "tail" + s + " xs = case xs of { [] -> []; h : t -> t }\n";
  out += "null" + s + " xs = case xs of { [] -> 1; h : t -> 0 }\n";
  out += "cons" + s + " x xs = x : xs\n";
  out += "single" + s + " x = [x]\n";
  out += "pairup" + s + " x y = [x, y]\n";
  out += "second" + s + " xs = head" + s + " (tail" + s + " xs)\n";
  out += "third" + s + " xs = head" + s + " (tail" + s + " (tail" + s + " xs))\n";
  out += "length3" + s + " xs = case xs of { [] -> 0; h : t ->\n";
  out += "  case t of { [] -> 1; h2 : t2 -> case t2 of { [] -> 2; h3 : t3 -> 3 } } }\n";
  out += "append3" + s + " xs ys = case xs of { [] -> ys; h : t -> let a = h in\n";
  out += "  case t of { [] -> a : ys; h2 : t2 -> let b = h2 in\n";
  out += "  case t2 of { [] -> a : b : ys; h3 : t3 -> a : b : h3 : ys } } }\n";
  out += "concat" + s + " xs ys = append3" + s + " xs ys\n";
  out += "sum3" + s + " xs = head" + s + " xs + second" + s + " xs + third" + s + " xs\n";
  out += "product2" + s + " xs = head" + s + " xs * second" + s + " xs\n";
  out += "maximum2" + s + " xs = let a = head" + s + " xs in let b = second" + s + " xs in\n";
  out += "  if a >= b then a else b\n";
  out += "minimum2" + s + " xs = let a = head" + s + " xs in let b = second" + s + " xs in\n";
  out += "  if a <= b then a else b\n";
  out += "swap2" + s + " xs = pairup" + s + " (second" + s + " xs) (head" + s + " xs)\n";
  out += "reverse3" + s + " xs = case xs of { [] -> []; h : t -> let a = h in\n";
  out += "  case t of { [] -> [a]; h2 : t2 -> let b = h2 in\n";
  out += "  case t2 of { [] -> [b, a]; h3 : t3 -> [h3, b, a] } } }\n";
  out += "sort2" + s + " xs = pairup" + s + " (minimum2" + s + " xs) (maximum2" + s + " xs)\n";
  out += "dot2" + s + " xs ys = head" + s + " xs * head" + s + " ys +\n";
  out += "  second" + s + " xs * second" + s + " ys\n";
  out += "range2" + s + " x = pairup" + s + " x (x + 1)\n";
  out += "shift2" + s + " xs n = pairup" + s + " (head" + s + " xs + n) (second" + s + " xs + n)\n";
  out += "scale2" + s + " xs n = pairup" + s + " (head" + s + " xs * n) (second" + s + " xs * n)\n";
  out += "total" + s + " xs ys = sum3" + s + " (append3" + s + " xs ys)\n";
  return out;
}

// Materializes the workload of the scaling experiment: `mods` copies of the
// List module, each in `vers` identical versions, and a Main that uses each
// module in sequence. The seed varies the literals Main feeds in.
inline void write_bench_workload(const std::filesystem::path& root, int mods, int vers,
                                 unsigned seed = 0) {
  namespace fs = std::filesystem;
  for (int i = 1; i <= mods; ++i) {
    std::string mod = "List_" + std::to_string(i);
    for (int v = 1; v <= vers; ++v) {
      std::string version = std::to_string(v) + ".0.0";
      fs::create_directories(root / mod / version);
      std::ofstream out(root / mod / version / (mod + ".vl"));
      out << bench_module_source(mod);
    }
  }
  unsigned lcg = seed * 2654435761u + 1u;
  auto next = [&lcg] {
    lcg = lcg * 1664525u + 1013904223u;
    return static_cast<int>(lcg % 97);
  };
  fs::create_directories(root / "Main" / "1.0.0");
  std::ofstream out(root / "Main" / "1.0.0" / "Main.vl");
  out << "module Main where\n";
  for (int i = 1; i <= mods; ++i) out << "import List_" << i << "\n";
  out << "main =\n";
  for (int i = 1; i <= mods; ++i) {
    std::string s = "_List_" + std::to_string(i);
    out << "  let v" << i << " = sort2" << s << " (pairup" << s << " " << next() << " "
        << next() << ") in\n";
    out << "  let w" << i << " = total" << s << " v" << i << " (reverse3" << s << " v" << i
        << ") in\n";
  }
  out << " ";
  for (int i = 1; i <= mods; ++i) out << " w" << i << " +";
  out << " 0\n";
}

struct BenchRow {
  int mods, vers, reps;
  double mean_ms, stddev_ms;
};

inline BenchRow bench_config(const std::filesystem::path& scratch, int mods, int vers, int reps,
                             unsigned seed = 0) {
  namespace fs = std::filesystem;
  fs::path root = scratch / ("bench_" + std::to_string(mods) + "_" + std::to_string(vers));
  fs::remove_all(root);
  write_bench_workload(root, mods, vers, seed);
  Repository repo = load_repository(root);
  std::vector<double> times;
  for (int r = 0; r < reps; ++r) {
    CompiledUnit unit = compile_unit(repo, "Main");
    times.push_back(unit.solve_ms);
  }
  double mean = 0;
  for (double t : times) mean += t;
  mean /= times.size();
  double var = 0;
  for (double t : times) var += (t - mean) * (t - mean);
  var /= times.size();
  return BenchRow{mods, vers, reps, mean, std::sqrt(var)};
}

inline std::string bench_csv(const std::filesystem::path& scratch, int max_mods, int max_vers,
                             int reps, unsigned seed = 0) {
  std::string csv = "mods,vers,reps,mean_ms,stddev_ms\n";
  for (int m = 1; m <= max_mods; ++m)
    for (int v = 1; v <= max_vers; ++v) {
      BenchRow row = bench_config(scratch, m, v, reps, seed);
      char line[128];
      std::snprintf(line, sizeof line, "%d,%d,%d,%.3f,%.3f\n", row.mods, row.vers, row.reps,
                    row.mean_ms, row.stddev_ms);
      csv += line;
    }
  return csv;
}

}  // namespace vl
