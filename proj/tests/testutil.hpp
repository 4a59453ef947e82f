#pragma once

// Shared helpers for the test suites: fixed registries and label universes,
// random generators for resources and constraints, a brute-force constraint
// oracle, and an enumerator for small surface terms.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vl/ast.hpp"
#include "vl/lambdavl.hpp"
#include "vl/solver.hpp"
#include "vl/version.hpp"
#include "vl/vlmini.hpp"

namespace vltest {

inline std::filesystem::path samples_dir() {
  return std::filesystem::path(VL_SOURCE_DIR) / "samples";
}

// Two modules x two versions: a four-label universe.
inline vl::ModuleRegistry registry_2x2() {
  vl::ModuleRegistry reg;
  reg.add_module("A", {"1.0.0", "2.0.0"});
  reg.add_module("B", {"1.0.0", "2.0.0"});
  return reg;
}

inline vl::Resource random_resource(std::mt19937& rng, const std::vector<vl::VersionLabel>& uni) {
  std::uniform_int_distribution<int> kind(0, 4);
  if (kind(rng) == 0) return vl::Resource::bottom();
  vl::LabelSet s;
  std::uniform_int_distribution<int> coin(0, 1);
  for (const auto& l : uni)
    if (coin(rng)) s.insert(l);
  return vl::Resource::labels(std::move(s));
}

// Random registry with 1..3 modules of 1..3 versions each.
inline vl::ModuleRegistry random_registry(std::mt19937& rng) {
  std::uniform_int_distribution<int> d13(1, 3);
  vl::ModuleRegistry reg;
  int mods = d13(rng);
  for (int m = 0; m < mods; ++m) {
    int vers = d13(rng);
    std::vector<vl::VersionString> vs;
    for (int v = 1; v <= vers; ++v) vs.push_back(std::to_string(v) + ".0.0");
    reg.add_module(std::string(1, char('A' + m)), vs);
  }
  return reg;
}

// Random dependency constraint of at most `budget` nodes over the given
// variables and registry.
inline vl::DepPtr random_constraint(std::mt19937& rng, const vl::ModuleRegistry& reg,
                                    const std::vector<std::string>& vars, int budget) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<std::size_t> var(0, vars.size() - 1);
  if (budget <= 1) {
    switch (kind(rng) % 3) {
      case 0: return vl::DepConstraint::top();
      case 1: return vl::DepConstraint::var_dep(vars[var(rng)], vars[var(rng)]);
      default: {
        auto names = reg.names();
        std::uniform_int_distribution<std::size_t> mi(0, names.size() - 1);
        const auto& m = names[mi(rng)];
        const auto& vs = reg.versions(m);
        std::uniform_int_distribution<std::size_t> vi(0, vs.size() - 1);
        return vl::DepConstraint::label_dep(vars[var(rng)], {{m, vs[vi(rng)]}});
      }
    }
  }
  int left = budget / 2;
  auto a = random_constraint(rng, reg, vars, left);
  auto b = random_constraint(rng, reg, vars, budget - 1 - left);
  if (kind(rng) % 2 == 0) {
    auto c = std::make_shared<vl::DepConstraint>(vl::DepConstraint{vl::DepConstraint::K::And});
    c->l = a;
    c->r = b;
    return c;
  }
  return vl::DepConstraint::disj(a, b);
}

// Exhaustive oracle: enumerates every total assignment and evaluates the
// constraint directly.
struct BruteForce {
  std::vector<vl::Assignment> all;

  BruteForce(const vl::ModuleRegistry& reg, const std::vector<std::string>& vars) {
    std::vector<vl::VersionLabel> uni = vl::label_universe(reg);
    all.push_back({});
    for (const auto& v : vars) {
      std::vector<vl::Assignment> next;
      for (const auto& base : all)
        for (const auto& l : uni) {
          vl::Assignment a = base;
          a.insert({v, l});
          next.push_back(std::move(a));
        }
      all = std::move(next);
    }
  }

  std::vector<vl::Assignment> satisfying(const vl::DepPtr& c) const {
    std::vector<vl::Assignment> out;
    for (const auto& a : all)
      if (vl::eval_total(c, a)) out.push_back(a);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Surface term enumeration (closed terms over ints, lambdas, apps, lets)
// ---------------------------------------------------------------------------

inline void enumerate_surface(int depth, std::vector<std::string>& scope, int& name_supply,
                              std::vector<vl::STermPtr>& out, std::size_t limit) {
  if (out.size() >= limit) return;
  using vl::STerm;
  if (depth == 0) {
    out.push_back(STerm::integer(1));
    for (const auto& v : scope) out.push_back(STerm::var(v));
    return;
  }
  std::vector<vl::STermPtr> smaller;
  {
    std::vector<std::string> scope_copy = scope;
    enumerate_surface(depth - 1, scope_copy, name_supply, smaller, limit);
  }
  for (const auto& t : smaller) {
    if (out.size() >= limit) return;
    out.push_back(t);
  }
  // Lambdas: bind a fresh variable, enumerate bodies.
  std::string x = "x" + std::to_string(name_supply++);
  scope.push_back(x);
  std::vector<vl::STermPtr> bodies;
  enumerate_surface(depth - 1, scope, name_supply, bodies, limit);
  scope.pop_back();
  for (const auto& b : bodies) {
    if (out.size() >= limit) return;
    out.push_back(STerm::lam(x, b));
  }
  // Applications and lets over smaller terms (bounded combinations).
  for (const auto& f : smaller) {
    for (const auto& a : smaller) {
      if (out.size() >= limit) return;
      out.push_back(STerm::app(f, a));
    }
  }
  std::string y = "y" + std::to_string(name_supply++);
  for (const auto& bound : smaller) {
    scope.push_back(y);
    std::vector<vl::STermPtr> lb;
    enumerate_surface(depth - 1, scope, name_supply, lb, out.size() + 8 < limit ? out.size() + 8 : limit);
    scope.pop_back();
    for (const auto& body : lb) {
      if (out.size() >= limit) return;
      out.push_back(STerm::let(y, bound, body));
    }
  }
}

inline std::vector<vl::STermPtr> closed_surface_terms(int depth, std::size_t limit) {
  std::vector<std::string> scope;
  int supply = 0;
  std::vector<vl::STermPtr> out;
  enumerate_surface(depth, scope, supply, out, limit);
  return out;
}

// ---------------------------------------------------------------------------
// Candidate lambda-VL terms over a two-label universe. Lambdas carry binder
// annotations so the declarative checker can replay them in any position;
// the checker filters the well-typed subset.
// ---------------------------------------------------------------------------

struct LvlEnumerator {
  vl::VersionLabel l1 = vl::VersionLabel::of({{"M", "1.0.0"}});
  vl::VersionLabel l2 = vl::VersionLabel::of({{"M", "2.0.0"}});
  std::size_t limit;

  explicit LvlEnumerator(std::size_t limit = 9000) : limit(limit) {}

  std::vector<vl::VersionLabel> universe() const { return {l1, l2}; }

  std::vector<vl::MTyPtr> binder_types() const {
    using vl::MTy;
    using vl::Resource;
    return {
        MTy::integer(),
        MTy::box(Resource::labels({l1}), MTy::integer()),
        MTy::box(Resource::labels({l1, l2}), MTy::integer()),
    };
  }

  std::vector<vl::LTermPtr> terms(int depth) {
    std::vector<std::pair<std::string, vl::MTyPtr>> scope;
    auto out = gen(depth, scope);
    return out;
  }

 private:
  std::vector<vl::LTermPtr> gen(int depth,
                                std::vector<std::pair<std::string, vl::MTyPtr>>& scope) {
    using vl::LTerm;
    using vl::MPattern;
    std::vector<vl::LTermPtr> out;
    auto push = [&](vl::LTermPtr t) {
      if (out.size() < limit) out.push_back(std::move(t));
    };
    push(LTerm::integer(1));
    push(LTerm::integer(2));
    for (const auto& [n, ty] : scope) push(LTerm::var(n));
    if (depth == 0) return out;

    std::vector<vl::LTermPtr> sub = gen(depth - 1, scope);
    for (const auto& t : sub) {
      push(LTerm::promote(t));
      push(LTerm::extract(t, l1));
      push(LTerm::extract(t, l2));
    }
    for (std::size_t i = 0; i < sub.size() && i < 9; ++i)
      for (std::size_t j = 0; j < sub.size() && j < 9; ++j) {
        push(LTerm::vrecord({{l1, sub[i]}, {l2, sub[j]}}));
        push(LTerm::vrecord_at({{l1, sub[i]}, {l2, sub[j]}}, l1));
        push(LTerm::vrecord_at({{l1, sub[i]}, {l2, sub[j]}}, l2));
        push(LTerm::app(sub[i], sub[j]));
      }
    // Lambdas and contextual lets binding one variable.
    std::string x = "v" + std::to_string(scope.size());
    for (const auto& bt : binder_types()) {
      scope.emplace_back(x, bt);
      std::vector<vl::LTermPtr> bodies = gen(depth - 1, scope);
      scope.pop_back();
      for (std::size_t i = 0; i < bodies.size() && i < 16; ++i) {
        if (bt->k == vl::MTy::K::Box)
          push(LTerm::lam(MPattern::promote(MPattern::var(x)), bodies[i], bt));
        else
          push(LTerm::lam(MPattern::var(x), bodies[i], bt));
      }
      if (bt->k == vl::MTy::K::Box)
        for (std::size_t i = 0; i < sub.size() && i < 6; ++i)
          for (std::size_t j = 0; j < std::min<std::size_t>(sub.size(), 6); ++j)
            push(LTerm::clet(x, sub[i], gen_body_at(depth - 1, scope, x, bt, j)));
    }
    return out;
  }

  vl::LTermPtr gen_body_at(int depth, std::vector<std::pair<std::string, vl::MTyPtr>>& scope,
                           const std::string& x, const vl::MTyPtr& bt, std::size_t pick) {
    scope.emplace_back(x, bt);
    std::vector<vl::LTermPtr> bodies = gen(depth, scope);
    scope.pop_back();
    return bodies[pick % bodies.size()];
  }
};

}  // namespace vltest
