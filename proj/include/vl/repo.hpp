#pragma once

// Loads a module repository laid out as root/<Module>/<version>/<Module>.vl.
// The registry is derived from the directory tree; there is no separate
// manifest. Translation and bundling later walk the import DAG from the
// leaves up, so the loader also produces a topological order.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vl/parser.hpp"

namespace vl {

struct MissingModuleVersion : Error {
  MissingModuleVersion(const ModuleName& m, const VersionString& v)
      : Error("missing source for module " + m + " version " + v) {}
};

struct ImportCycle : Error {
  explicit ImportCycle(const std::vector<ModuleName>& cycle) : Error(render(cycle)) {}
  static std::string render(const std::vector<ModuleName>& cycle) {
    std::string out = "import cycle: ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      if (i) out += " -> ";
      out += cycle[i];
    }
    return out;
  }
};

struct RecursiveDefinition : Error {
  using Error::Error;
};

struct Repository {
  ModuleRegistry registry;
  std::map<std::pair<ModuleName, VersionString>, SurfaceModule> modules;
  std::vector<ModuleName> topo_order;  // leaves (no imports) first

  const SurfaceModule& at(const ModuleName& m, const VersionString& v) const {
    auto it = modules.find({m, v});
    if (it == modules.end()) throw MissingModuleVersion(m, v);
    return it->second;
  }

  // Import sets are identical across a module's versions, so the edge set
  // is well-defined per module name.
  const std::vector<ModuleName>& imports_of(const ModuleName& m) const {
    return at(m, registry.versions(m).front()).imports;
  }

  std::set<ModuleName> transitive_imports(const ModuleName& m) const {
    std::set<ModuleName> out;
    std::vector<ModuleName> work{m};
    while (!work.empty()) {
      ModuleName cur = work.back();
      work.pop_back();
      for (const auto& imp : imports_of(cur))
        if (out.insert(imp).second) work.push_back(imp);
    }
    return out;
  }
};

inline ModuleRegistry derive_registry(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error("module path is not a directory: " + root.string());
  ModuleRegistry reg;
  for (const auto& mod_entry : fs::directory_iterator(root)) {
    if (!mod_entry.is_directory()) continue;
    ModuleName name = mod_entry.path().filename().string();
    std::vector<VersionString> versions;
    for (const auto& ver_entry : fs::directory_iterator(mod_entry.path())) {
      if (!ver_entry.is_directory()) continue;
      versions.push_back(ver_entry.path().filename().string());
    }
    if (!versions.empty()) reg.add_module(name, std::move(versions));
  }
  if (reg.empty()) throw EmptyRegistry("no modules found under " + root.string());
  return reg;
}

namespace detail {

inline void free_vars(const STermPtr& t, std::set<std::string>& bound,
                      std::map<std::string, Span>& out) {
  switch (t->kind) {
    case STerm::Kind::Var:
      if (!bound.count(t->name) && !out.count(t->name)) out[t->name] = t->span;
      return;
    case STerm::Kind::Lam: {
      bool fresh = bound.insert(t->name).second;
      free_vars(t->a, bound, out);
      if (fresh) bound.erase(t->name);
      return;
    }
    case STerm::Kind::Let: {
      free_vars(t->a, bound, out);
      bool fresh = bound.insert(t->name).second;
      free_vars(t->b, bound, out);
      if (fresh) bound.erase(t->name);
      return;
    }
    case STerm::Kind::Case: {
      free_vars(t->a, bound, out);
      for (const auto& br : t->branches) {
        std::vector<std::string> names;
        std::vector<SPatternPtr> work{br.pattern};
        while (!work.empty()) {
          auto p = work.back();
          work.pop_back();
          if (p->kind == SPattern::Kind::Var && bound.insert(p->name).second)
            names.push_back(p->name);
          if (p->first) work.push_back(p->first);
          if (p->second) work.push_back(p->second);
        }
        free_vars(br.body, bound, out);
        for (const auto& n : names) bound.erase(n);
      }
      return;
    }
    default:
      if (t->a) free_vars(t->a, bound, out);
      if (t->b) free_vars(t->b, bound, out);
      return;
  }
}

inline std::map<std::string, Span> free_vars(const STermPtr& t) {
  std::set<std::string> bound;
  std::map<std::string, Span> out;
  free_vars(t, bound, out);
  return out;
}

}  // namespace detail

namespace repo_detail {

inline void parse_root_into(Repository& repo, const std::filesystem::path& root,
                            const ModuleRegistry& reg) {
  namespace fs = std::filesystem;
  for (const auto& m : reg.names()) {
    for (const auto& v : reg.versions(m)) {
      fs::path file = root / m / v / (m + ".vl");
      if (!fs::is_regular_file(file)) throw MissingModuleVersion(m, v);
      std::ifstream in(file);
      std::stringstream buf;
      buf << in.rdbuf();
      SurfaceModule mod;
      try {
        mod = parse_module(buf.str());
      } catch (const SyntaxError& e) {
        throw SyntaxError(e.span, file.string() + ":" + std::to_string(e.span.line) + ":" +
                                       std::to_string(e.span.col) + ": " + e.what());
      }
      if (mod.name != m)
        throw Error(file.string() + ": module is named " + mod.name + ", expected " + m);
      mod.version = v;
      repo.modules[{m, v}] = std::move(mod);
    }
  }
}

}  // namespace repo_detail

// Validates a parsed repository: import sets must agree across versions of
// a module, the import graph must be acyclic, every reference must resolve
// to an import's symbol or an earlier definition of the same module, and no
// definition may refer to itself (the core calculus has no fixpoint).
inline void finalize_repository(Repository& repo) {
  const ModuleRegistry& reg = repo.registry;
  for (const auto& m : reg.names()) {
    const auto& first = repo.at(m, reg.versions(m).front());
    std::set<std::string> base(first.imports.begin(), first.imports.end());
    for (const auto& v : reg.versions(m)) {
      const auto& mod = repo.at(m, v);
      if (std::set<std::string>(mod.imports.begin(), mod.imports.end()) != base)
        throw Error("module " + m + " has differing import lists across versions");
      for (const auto& imp : mod.imports)
        if (!reg.has_module(imp))
          throw Error("module " + m + " imports unregistered module " + imp);
    }
  }

  // Topological sort with cycle reporting (DFS, leaves first).
  std::map<ModuleName, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::vector<ModuleName> stack;
  auto visit = [&](auto&& self, const ModuleName& m) -> void {
    if (state[m] == 2) return;
    if (state[m] == 1) {
      std::vector<ModuleName> cycle;
      auto it = std::find(stack.begin(), stack.end(), m);
      cycle.assign(it, stack.end());
      cycle.push_back(m);
      throw ImportCycle(cycle);
    }
    state[m] = 1;
    stack.push_back(m);
    for (const auto& imp : repo.imports_of(m)) self(self, imp);
    stack.pop_back();
    state[m] = 2;
    repo.topo_order.push_back(m);
  };
  for (const auto& m : reg.names()) visit(visit, m);

  // Reference validation per module version.
  for (const auto& [key, mod] : repo.modules) {
    std::set<std::string> visible;
    for (const auto& imp : mod.imports)
      for (const auto& iv : reg.versions(imp))
        for (const auto& d : repo.at(imp, iv).defs) visible.insert(d.symbol);
    for (const auto& d : mod.defs) {
      for (const auto& [name, span] : detail::free_vars(d.body)) {
        if (name == d.symbol)
          throw RecursiveDefinition("definition '" + d.symbol + "' in module " + key.first +
                                    " refers to itself (recursion is not supported)");
        if (!visible.count(name))
          throw UnboundVariable("unbound variable '" + name + "' in " + key.first + "." +
                                d.symbol + " (line " + std::to_string(span.line) + ")");
      }
      visible.insert(d.symbol);
    }
  }
}

inline Repository load_repository(const std::filesystem::path& root, const ModuleRegistry& reg) {
  Repository repo;
  repo.registry = reg;
  repo_detail::parse_root_into(repo, root, reg);
  finalize_repository(repo);
  return repo;
}

inline Repository load_repository(const std::filesystem::path& root) {
  return load_repository(root, derive_registry(root));
}

// Several roots form one repository; module names must not collide.
inline Repository load_repositories(const std::vector<std::filesystem::path>& roots) {
  if (roots.empty()) throw Error("no module paths given");
  if (roots.size() == 1) return load_repository(roots.front());
  Repository repo;
  std::vector<ModuleRegistry> regs;
  for (const auto& root : roots) {
    ModuleRegistry reg = derive_registry(root);
    for (const auto& m : reg.names()) {
      if (repo.registry.has_module(m))
        throw Error("module " + m + " appears under more than one module path");
      repo.registry.add_module(m, reg.versions(m));
    }
    regs.push_back(std::move(reg));
  }
  for (std::size_t i = 0; i < roots.size(); ++i)
    repo_detail::parse_root_into(repo, roots[i], regs[i]);
  finalize_repository(repo);
  return repo;
}

}  // namespace vl
