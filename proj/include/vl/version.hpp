#pragma once

// Version labels, version resources, and the module registry.
//
// A version label assigns one version to every module in scope; resources
// grade types and assumptions with the set of labels a value may be used
// at. (Resource, +, bottom, *, unit, <=) is a structural semiring: +/* are
// set union with bottom as additive identity and multiplicative absorber,
// and the empty label set as multiplicative identity.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VariableResource : Error {
  using Error::Error;
};
struct EmptyRegistry : Error {
  using Error::Error;
};
struct UnboundVariable : Error {
  using Error::Error;
};

using ModuleName = std::string;
using VersionString = std::string;

// Semver triples "X.Y.Z", compared numerically component-wise.
inline std::vector<long> parse_version(const VersionString& v) {
  std::vector<long> parts;
  std::istringstream in(v);
  std::string chunk;
  while (std::getline(in, chunk, '.')) {
    if (chunk.empty() || chunk.find_first_not_of("0123456789") != std::string::npos)
      throw Error("malformed version string: " + v);
    parts.push_back(std::stol(chunk));
  }
  if (parts.empty()) throw Error("malformed version string: " + v);
  return parts;
}

inline int compare_versions(const VersionString& a, const VersionString& b) {
  auto pa = parse_version(a), pb = parse_version(b);
  pa.resize(std::max(pa.size(), pb.size()), 0);
  pb.resize(pa.size(), 0);
  if (pa < pb) return -1;
  if (pb < pa) return 1;
  return 0;
}

// The set of modules in scope and their registered versions, ascending.
class ModuleRegistry {
 public:
  void add_module(const ModuleName& name, std::vector<VersionString> versions) {
    if (versions.empty()) throw Error("module " + name + " has no versions");
    std::sort(versions.begin(), versions.end(), [](const auto& a, const auto& b) {
      return compare_versions(a, b) < 0;
    });
    for (std::size_t i = 1; i < versions.size(); ++i)
      if (versions[i] == versions[i - 1])
        throw Error("duplicate version " + versions[i] + " of module " + name);
    modules_[name] = std::move(versions);
  }

  bool has_module(const ModuleName& name) const { return modules_.count(name) != 0; }

  bool has_version(const ModuleName& name, const VersionString& v) const {
    auto it = modules_.find(name);
    if (it == modules_.end()) return false;
    return std::find(it->second.begin(), it->second.end(), v) != it->second.end();
  }

  const std::vector<VersionString>& versions(const ModuleName& name) const {
    auto it = modules_.find(name);
    if (it == modules_.end()) throw Error("unknown module: " + name);
    return it->second;
  }

  // Index into the ascending version list; newest version has the largest index.
  int version_index(const ModuleName& name, const VersionString& v) const {
    const auto& vs = versions(name);
    auto it = std::find(vs.begin(), vs.end(), v);
    if (it == vs.end()) throw Error("unknown version " + v + " of module " + name);
    return static_cast<int>(it - vs.begin());
  }

  std::vector<ModuleName> names() const {
    std::vector<ModuleName> out;
    for (const auto& [m, _] : modules_) out.push_back(m);
    return out;
  }

  bool empty() const { return modules_.empty(); }
  std::size_t size() const { return modules_.size(); }

  ModuleRegistry restricted_to(const std::set<ModuleName>& keep) const {
    ModuleRegistry out;
    for (const auto& [m, vs] : modules_)
      if (keep.count(m)) out.modules_[m] = vs;
    return out;
  }

 private:
  std::map<ModuleName, std::vector<VersionString>> modules_;
};

// A total assignment of one version to each module of the registry in use.
// The underlying map is ordered, so equality is structural.
class VersionLabel {
 public:
  VersionLabel() = default;
  explicit VersionLabel(std::map<ModuleName, VersionString> assignment)
      : assignment_(std::move(assignment)) {}

  static VersionLabel of(std::initializer_list<std::pair<const ModuleName, VersionString>> init) {
    return VersionLabel(std::map<ModuleName, VersionString>(init));
  }

  const VersionString& version_of(const ModuleName& m) const {
    auto it = assignment_.find(m);
    if (it == assignment_.end()) throw Error("label does not mention module " + m);
    return it->second;
  }

  bool mentions(const ModuleName& m) const { return assignment_.count(m) != 0; }
  const std::map<ModuleName, VersionString>& assignment() const { return assignment_; }

  auto operator<=>(const VersionLabel&) const = default;

  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [m, v] : assignment_) {
      if (!first) out += ", ";
      out += m + " = " + v;
      first = false;
    }
    return out + "}";
  }

 private:
  std::map<ModuleName, VersionString> assignment_;
};

using LabelSet = std::set<VersionLabel>;

// A partial version assignment <M1 = V1, ...>; used by ver-of terms and as
// the right-hand side of label dependencies.
using PartialLabel = std::map<ModuleName, VersionString>;

inline std::string partial_label_string(const PartialLabel& d) {
  std::string out = "⟨";
  bool first = true;
  for (const auto& [m, v] : d) {
    if (!first) out += ", ";
    out += m + " = " + v;
    first = false;
  }
  return out + "⟩";
}

// A full label agrees with a partial one iff they coincide on every module
// the partial label mentions.
inline bool label_matches(const VersionLabel& l, const PartialLabel& d) {
  for (const auto& [m, v] : d) {
    if (!l.mentions(m) || l.version_of(m) != v) return false;
  }
  return true;
}

// Every module-version combination, |result| = prod_M |versions(M)|.
// Computed per compilation unit from its transitive imports so the blowup
// stays contained to the modules actually in scope.
inline std::vector<VersionLabel> label_universe(const ModuleRegistry& reg) {
  if (reg.empty()) throw EmptyRegistry("label universe of an empty registry");
  std::vector<VersionLabel> acc{VersionLabel{}};
  for (const auto& m : reg.names()) {
    std::vector<VersionLabel> next;
    for (const auto& l : acc)
      for (const auto& v : reg.versions(m)) {
        auto a = l.assignment();
        a[m] = v;
        next.push_back(VersionLabel(std::move(a)));
      }
    acc = std::move(next);
  }
  return acc;
}

// A version resource. Ground resources are bottom (unusable) or a label
// set (usable exactly there); Var appears only during inference and
// bundling. Sum/Product are symbolic +/* over resources containing
// variables; they arise in usage contexts when promotions nest and never
// survive into a fully solved program.
class Resource {
 public:
  enum class Kind { Bottom, Labels, Var, Sum, Product };

  Resource() : kind_(Kind::Labels) {}  // default-constructs the unit

  static Resource bottom() { return Resource(Kind::Bottom); }
  static Resource unit() { return Resource(Kind::Labels); }  // empty label set
  static Resource labels(LabelSet ls) {
    Resource r(Kind::Labels);
    r.labels_ = std::move(ls);
    return r;
  }
  static Resource var(std::string name) {
    Resource r(Kind::Var);
    r.var_ = std::move(name);
    return r;
  }

  Kind kind() const { return kind_; }
  bool is_bottom() const { return kind_ == Kind::Bottom; }
  bool is_labels() const { return kind_ == Kind::Labels; }
  bool is_unit() const { return kind_ == Kind::Labels && labels_.empty(); }
  bool is_var() const { return kind_ == Kind::Var; }
  bool is_ground() const { return kind_ == Kind::Bottom || kind_ == Kind::Labels; }

  const LabelSet& label_set() const {
    if (!is_labels()) throw Error("resource is not a label set");
    return labels_;
  }
  const std::string& var_name() const {
    if (!is_var()) throw Error("resource is not a variable");
    return var_;
  }
  const std::vector<Resource>& parts() const { return parts_; }

  void collect_vars(std::set<std::string>& out) const {
    if (kind_ == Kind::Var) out.insert(var_);
    for (const auto& p : parts_) p.collect_vars(out);
  }

  bool operator==(const Resource& o) const {
    return kind_ == o.kind_ && labels_ == o.labels_ && var_ == o.var_ && parts_ == o.parts_;
  }
  bool operator<(const Resource& o) const { return to_string() < o.to_string(); }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Bottom: return "⊥";
      case Kind::Labels: {
        if (labels_.empty()) return "∅";
        std::string out = "{";
        bool first = true;
        for (const auto& l : labels_) {
          if (!first) out += ", ";
          out += l.to_string();
          first = false;
        }
        return out + "}";
      }
      case Kind::Var: return var_;
      case Kind::Sum:
      case Kind::Product: {
        std::string sep = kind_ == Kind::Sum ? " ⊕ " : " ⊗ ";
        std::string out = "(";
        for (std::size_t i = 0; i < parts_.size(); ++i) {
          if (i) out += sep;
          out += parts_[i].to_string();
        }
        return out + ")";
      }
    }
    return "?";
  }

  friend Resource sym_add(const Resource& a, const Resource& b);
  friend Resource sym_mul(const Resource& a, const Resource& b);

 private:
  explicit Resource(Kind k) : kind_(k) {}
  static Resource symbolic(Kind k, std::vector<Resource> parts) {
    Resource r(k);
    r.parts_ = std::move(parts);
    return r;
  }

  Kind kind_;
  LabelSet labels_;
  std::string var_;
  std::vector<Resource> parts_;
};

namespace detail {
inline void require_ground(const Resource& r, const char* op) {
  if (!r.is_ground())
    throw VariableResource(std::string(op) + " applied to non-ground resource " + r.to_string());
}
}  // namespace detail

// r1 + r2: bottom is the identity, otherwise set union.
inline Resource res_add(const Resource& r1, const Resource& r2) {
  detail::require_ground(r1, "res_add");
  detail::require_ground(r2, "res_add");
  if (r1.is_bottom()) return r2;
  if (r2.is_bottom()) return r1;
  LabelSet u = r1.label_set();
  u.insert(r2.label_set().begin(), r2.label_set().end());
  return Resource::labels(std::move(u));
}

// r1 * r2: bottom absorbs, the empty set is the identity, otherwise union.
inline Resource res_mul(const Resource& r1, const Resource& r2) {
  detail::require_ground(r1, "res_mul");
  detail::require_ground(r2, "res_mul");
  if (r1.is_bottom() || r2.is_bottom()) return Resource::bottom();
  LabelSet u = r1.label_set();
  u.insert(r2.label_set().begin(), r2.label_set().end());
  return Resource::labels(std::move(u));
}

// r1 <= r2: bottom is the least element; label sets compare by inclusion.
inline bool res_leq(const Resource& r1, const Resource& r2) {
  detail::require_ground(r1, "res_leq");
  detail::require_ground(r2, "res_leq");
  if (r1.is_bottom()) return true;
  if (r2.is_bottom()) return false;
  return std::includes(r2.label_set().begin(), r2.label_set().end(),
                       r1.label_set().begin(), r1.label_set().end());
}

namespace detail {
inline void flatten(Resource::Kind k, const Resource& r, std::vector<Resource>& out) {
  if (r.kind() == k) {
    for (const auto& p : r.parts()) flatten(k, p, out);
  } else {
    out.push_back(r);
  }
}

inline std::vector<Resource> normalize_parts(Resource::Kind k, const Resource& a,
                                             const Resource& b) {
  std::vector<Resource> parts;
  flatten(k, a, parts);
  flatten(k, b, parts);
  std::sort(parts.begin(), parts.end());
  parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
  return parts;
}
}  // namespace detail

// Symbolic +; collapses to res_add on ground arguments.
inline Resource sym_add(const Resource& a, const Resource& b) {
  if (a.is_ground() && b.is_ground()) return res_add(a, b);
  if (a.is_bottom()) return b;
  if (b.is_bottom()) return a;
  if (a == b) return a;
  auto parts = detail::normalize_parts(Resource::Kind::Sum, a, b);
  if (parts.size() == 1) return parts[0];
  return Resource::symbolic(Resource::Kind::Sum, std::move(parts));
}

// Symbolic *; collapses to res_mul on ground arguments.
inline Resource sym_mul(const Resource& a, const Resource& b) {
  if (a.is_ground() && b.is_ground()) return res_mul(a, b);
  if (a.is_bottom() || b.is_bottom()) return Resource::bottom();
  if (a.is_unit()) return b;
  if (b.is_unit()) return a;
  if (a == b) return a;
  auto parts = detail::normalize_parts(Resource::Kind::Product, a, b);
  if (parts.size() == 1) return parts[0];
  return Resource::symbolic(Resource::Kind::Product, std::move(parts));
}

}  // namespace vl
