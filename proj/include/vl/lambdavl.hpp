#pragma once

// The lambda-VL core calculus: terms with versioned records and extraction,
// default version overwriting, a small-step evaluator driven by evaluation
// contexts, and a declarative type checker used as the semantic oracle for
// the algorithmic inference.
//
// The checker decides derivability directly over ground types and
// resources. Context splitting never needs search: grades merge with an
// idempotent join, so both sides of a split can keep the full grade, and
// linear assumptions route by free variables. Where a rule has a free
// resource (promotion grades met in synthesis position, extraction), the
// checker enumerates candidates over the finite label universe; lambdas in
// synthesis position read an optional binder annotation.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vl/vlmini.hpp"

namespace vl {

struct FuelExhausted : Error {
  using Error::Error;
};

struct LTerm;
using LTermPtr = std::shared_ptr<const LTerm>;

struct LTerm {
  enum class K { Int, Var, App, Lam, CLet, Promote, VRecord, VRecordAt, Extract };
  K k;
  long value = 0;
  std::string name;                        // Var, CLet binder
  LTermPtr a, b;                           // App fn/arg, Lam body (a), CLet bound/body,
                                           // Promote body (a), Extract operand (a)
  MPatternPtr pattern;                     // Lam
  std::optional<MTyPtr> binder_ty;         // Lam annotation for synthesis positions
  std::map<VersionLabel, LTermPtr> record; // VRecord / VRecordAt
  VersionLabel chosen;                     // VRecordAt / Extract label

  static LTermPtr integer(long v) {
    auto t = std::make_shared<LTerm>(LTerm{K::Int});
    t->value = v;
    return t;
  }
  static LTermPtr var(std::string n) {
    auto t = std::make_shared<LTerm>(LTerm{K::Var});
    t->name = std::move(n);
    return t;
  }
  static LTermPtr app(LTermPtr f, LTermPtr x) {
    auto t = std::make_shared<LTerm>(LTerm{K::App});
    t->a = std::move(f);
    t->b = std::move(x);
    return t;
  }
  static LTermPtr lam(MPatternPtr p, LTermPtr body, std::optional<MTyPtr> ann = std::nullopt) {
    auto t = std::make_shared<LTerm>(LTerm{K::Lam});
    t->pattern = std::move(p);
    t->a = std::move(body);
    t->binder_ty = std::move(ann);
    return t;
  }
  static LTermPtr clet(std::string x, LTermPtr bound, LTermPtr body) {
    auto t = std::make_shared<LTerm>(LTerm{K::CLet});
    t->name = std::move(x);
    t->a = std::move(bound);
    t->b = std::move(body);
    return t;
  }
  static LTermPtr promote(LTermPtr body) {
    auto t = std::make_shared<LTerm>(LTerm{K::Promote});
    t->a = std::move(body);
    return t;
  }
  static LTermPtr vrecord(std::map<VersionLabel, LTermPtr> entries) {
    auto t = std::make_shared<LTerm>(LTerm{K::VRecord});
    t->record = std::move(entries);
    return t;
  }
  static LTermPtr vrecord_at(std::map<VersionLabel, LTermPtr> entries, VersionLabel chosen) {
    if (!entries.count(chosen)) throw Error("chosen label is not a key of the record");
    auto t = std::make_shared<LTerm>(LTerm{K::VRecordAt});
    t->record = std::move(entries);
    t->chosen = std::move(chosen);
    return t;
  }
  static LTermPtr extract(LTermPtr u, VersionLabel l) {
    auto t = std::make_shared<LTerm>(LTerm{K::Extract});
    t->a = std::move(u);
    t->chosen = std::move(l);
    return t;
  }
};

inline std::string lterm_string(const LTermPtr& t) {
  auto atom = [](const LTermPtr& u, const std::string& s) {
    switch (u->k) {
      case LTerm::K::Int:
      case LTerm::K::Var:
      case LTerm::K::Promote:
      case LTerm::K::VRecord:
      case LTerm::K::VRecordAt:
        return s;
      default:
        return "(" + s + ")";
    }
  };
  switch (t->k) {
    case LTerm::K::Int: return std::to_string(t->value);
    case LTerm::K::Var: return t->name;
    case LTerm::K::App: {
      std::string fn = lterm_string(t->a);
      if (t->a->k != LTerm::K::App) fn = atom(t->a, fn);
      return fn + " " + atom(t->b, lterm_string(t->b));
    }
    case LTerm::K::Lam:
      return "\\" + pattern_string(t->pattern) + " -> " + lterm_string(t->a);
    case LTerm::K::CLet:
      return "let [" + t->name + "] = " + lterm_string(t->a) + " in " + lterm_string(t->b);
    case LTerm::K::Promote:
      return "[" + lterm_string(t->a) + "]";
    case LTerm::K::VRecord:
    case LTerm::K::VRecordAt: {
      std::string out = "<";
      bool first = true;
      for (const auto& [l, e] : t->record) {
        if (!first) out += ", ";
        out += l.to_string() + " = " + lterm_string(e);
        first = false;
      }
      if (t->k == LTerm::K::VRecordAt) out += " | " + t->chosen.to_string();
      return out + ">";
    }
    case LTerm::K::Extract:
      return atom(t->a, lterm_string(t->a)) + "." + t->chosen.to_string();
  }
  return "?";
}

// Structural key including binder annotations; used for memoization.
inline std::string lterm_key(const LTermPtr& t) {
  switch (t->k) {
    case LTerm::K::Lam: {
      std::string ann = t->binder_ty ? ty_string(*t->binder_ty) : "?";
      return "\\" + pattern_string(t->pattern) + "@" + ann + "." + lterm_key(t->a);
    }
    case LTerm::K::App:
      return "(" + lterm_key(t->a) + " " + lterm_key(t->b) + ")";
    case LTerm::K::CLet:
      return "let[" + t->name + "]=" + lterm_key(t->a) + ";" + lterm_key(t->b);
    case LTerm::K::Promote:
      return "[" + lterm_key(t->a) + "]";
    case LTerm::K::VRecord:
    case LTerm::K::VRecordAt: {
      std::string out = "<";
      for (const auto& [l, e] : t->record) out += l.to_string() + "=" + lterm_key(e) + ",";
      if (t->k == LTerm::K::VRecordAt) out += "|" + t->chosen.to_string();
      return out + ">";
    }
    case LTerm::K::Extract:
      return lterm_key(t->a) + "." + t->chosen.to_string();
    default:
      return lterm_string(t);
  }
}

inline bool lterm_equal(const LTermPtr& x, const LTermPtr& y) {
  if (x->k != y->k) return false;
  switch (x->k) {
    case LTerm::K::Int: return x->value == y->value;
    case LTerm::K::Var: return x->name == y->name;
    case LTerm::K::Lam:
      return pattern_string(x->pattern) == pattern_string(y->pattern) &&
             lterm_equal(x->a, y->a);
    case LTerm::K::CLet:
      return x->name == y->name && lterm_equal(x->a, y->a) && lterm_equal(x->b, y->b);
    case LTerm::K::App:
      return lterm_equal(x->a, y->a) && lterm_equal(x->b, y->b);
    case LTerm::K::Promote:
      return lterm_equal(x->a, y->a);
    case LTerm::K::VRecord:
    case LTerm::K::VRecordAt: {
      if (x->chosen != y->chosen || x->record.size() != y->record.size()) return false;
      auto it = y->record.begin();
      for (const auto& [l, e] : x->record) {
        if (l != it->first || !lterm_equal(e, it->second)) return false;
        ++it;
      }
      return true;
    }
    case LTerm::K::Extract:
      return x->chosen == y->chosen && lterm_equal(x->a, y->a);
  }
  return false;
}

// Values: integers, lambdas, and versioned values (promotions and records).
inline bool is_value(const LTermPtr& t) {
  switch (t->k) {
    case LTerm::K::Int:
    case LTerm::K::Lam:
    case LTerm::K::Promote:
    case LTerm::K::VRecord:
      return true;
    default:
      return false;
  }
}

inline bool is_versioned_value(const LTermPtr& t) {
  return t->k == LTerm::K::Promote || t->k == LTerm::K::VRecord;
}

// ---------------------------------------------------------------------------
// Default version overwriting t@l
// ---------------------------------------------------------------------------

inline LTermPtr overwrite_default(const LTermPtr& t, const VersionLabel& l) {
  switch (t->k) {
    case LTerm::K::Int:
    case LTerm::K::Var:
    case LTerm::K::Promote:  // promotions and records are fixpoints
    case LTerm::K::VRecord:
      return t;
    case LTerm::K::Lam:
      return LTerm::lam(t->pattern, overwrite_default(t->a, l), t->binder_ty);
    case LTerm::K::App:
      return LTerm::app(overwrite_default(t->a, l), overwrite_default(t->b, l));
    case LTerm::K::CLet:
      return LTerm::clet(t->name, overwrite_default(t->a, l), overwrite_default(t->b, l));
    case LTerm::K::Extract:
      return LTerm::extract(overwrite_default(t->a, l), t->chosen);
    case LTerm::K::VRecordAt:
      if (t->record.count(l)) return LTerm::vrecord_at(t->record, l);
      return t;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Substitution and small-step evaluation
// ---------------------------------------------------------------------------

namespace lvl_detail {

inline void free_vars(const LTermPtr& t, std::set<std::string>& bound,
                      std::set<std::string>& out) {
  switch (t->k) {
    case LTerm::K::Int: return;
    case LTerm::K::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case LTerm::K::Lam: {
      std::set<std::string> vars;
      pattern_vars(t->pattern, vars);
      std::vector<std::string> added;
      for (const auto& v : vars)
        if (bound.insert(v).second) added.push_back(v);
      free_vars(t->a, bound, out);
      for (const auto& v : added) bound.erase(v);
      return;
    }
    case LTerm::K::CLet: {
      free_vars(t->a, bound, out);
      bool added = bound.insert(t->name).second;
      free_vars(t->b, bound, out);
      if (added) bound.erase(t->name);
      return;
    }
    case LTerm::K::VRecord:
    case LTerm::K::VRecordAt:
      for (const auto& [l, e] : t->record) free_vars(e, bound, out);
      return;
    default:
      if (t->a) free_vars(t->a, bound, out);
      if (t->b) free_vars(t->b, bound, out);
      return;
  }
}

inline std::set<std::string> free_vars(const LTermPtr& t) {
  std::set<std::string> bound, out;
  free_vars(t, bound, out);
  return out;
}

}  // namespace lvl_detail

// Capture-avoiding [s/x]t. Shadowing binders stop the walk; a binder that
// would capture a free variable of s is renamed first.
inline LTermPtr lsubst(const LTermPtr& t, const std::string& x, const LTermPtr& s) {
  switch (t->k) {
    case LTerm::K::Int: return t;
    case LTerm::K::Var: return t->name == x ? s : t;
    case LTerm::K::App: return LTerm::app(lsubst(t->a, x, s), lsubst(t->b, x, s));
    case LTerm::K::Promote: return LTerm::promote(lsubst(t->a, x, s));
    case LTerm::K::Extract: return LTerm::extract(lsubst(t->a, x, s), t->chosen);
    case LTerm::K::VRecord:
    case LTerm::K::VRecordAt: {
      std::map<VersionLabel, LTermPtr> entries;
      for (const auto& [l, e] : t->record) entries[l] = lsubst(e, x, s);
      return t->k == LTerm::K::VRecord ? LTerm::vrecord(std::move(entries))
                                       : LTerm::vrecord_at(std::move(entries), t->chosen);
    }
    case LTerm::K::Lam: {
      std::set<std::string> vars;
      pattern_vars(t->pattern, vars);
      if (vars.count(x)) return t;  // shadowed
      auto free_s = lvl_detail::free_vars(s);
      for (const auto& v : vars)
        if (free_s.count(v))
          throw Error("substitution would capture " + v + "; rename binders first");
      return LTerm::lam(t->pattern, lsubst(t->a, x, s), t->binder_ty);
    }
    case LTerm::K::CLet: {
      LTermPtr bound = lsubst(t->a, x, s);
      if (t->name == x) return LTerm::clet(t->name, bound, t->b);
      if (lvl_detail::free_vars(s).count(t->name))
        throw Error("substitution would capture " + t->name + "; rename binders first");
      return LTerm::clet(t->name, bound, lsubst(t->b, x, s));
    }
  }
  return t;
}

// Picks l_k for substituting a versioned record through a promoted binder.
// Any choice preserves typing; the default follows the toolchain-wide
// newest preference.
using LabelChoice = std::function<VersionLabel(const std::vector<VersionLabel>&)>;

inline VersionLabel newest_label_choice(const std::vector<VersionLabel>& labels) {
  VersionLabel best = labels.front();
  for (const auto& l : labels) {
    auto bi = best.assignment().begin();
    bool newer = false;
    for (auto li = l.assignment().begin(); li != l.assignment().end() && bi != best.assignment().end();
         ++li, ++bi) {
      int c = compare_versions(li->second, bi->second);
      if (c != 0) {
        newer = c > 0;
        break;
      }
    }
    if (newer) best = l;
  }
  return best;
}

struct StepResult {
  LTermPtr term;   // null when no rule applies
  std::string rule;

  bool stuck() const { return term == nullptr; }
};

inline StepResult eval_step(const LTermPtr& t, const LabelChoice& choose = newest_label_choice) {
  switch (t->k) {
    case LTerm::K::Int:
    case LTerm::K::Var:
    case LTerm::K::Lam:
    case LTerm::K::Promote:
    case LTerm::K::VRecord:
      return {nullptr, ""};

    case LTerm::K::App: {
      if (!is_value(t->a)) {  // E ::= E t
        StepResult inner = eval_step(t->a, choose);
        if (inner.stuck()) return {nullptr, ""};
        return {LTerm::app(inner.term, t->b), inner.rule};
      }
      if (t->a->k != LTerm::K::Lam) return {nullptr, ""};
      const auto& p = t->a->pattern;
      if (p->k == MPattern::K::Var)  // E-abs1
        return {lsubst(t->a->a, p->name, t->b), "E-abs1"};
      if (p->k == MPattern::K::Promote && p->sub->k == MPattern::K::Var)  // E-abs2
        return {LTerm::clet(p->sub->name, t->b, t->a->a), "E-abs2"};
      return {nullptr, ""};
    }

    case LTerm::K::CLet: {
      if (!is_value(t->a)) {  // E ::= let [x] = E in t
        StepResult inner = eval_step(t->a, choose);
        if (inner.stuck()) return {nullptr, ""};
        return {LTerm::clet(t->name, inner.term, t->b), inner.rule};
      }
      if (t->a->k == LTerm::K::Promote)  // ([t'] |> [x]) t
        return {lsubst(t->b, t->name, t->a->a), "E-clet"};
      if (t->a->k == LTerm::K::VRecord) {  // (<l_i=t_i> |> [x]) t, choose l_k
        std::vector<VersionLabel> keys;
        for (const auto& [l, e] : t->a->record) keys.push_back(l);
        VersionLabel lk = choose(keys);
        return {lsubst(t->b, t->name, LTerm::vrecord_at(t->a->record, lk)), "E-clet"};
      }
      return {nullptr, ""};
    }

    case LTerm::K::VRecordAt: {  // E-veri
      auto it = t->record.find(t->chosen);
      if (it == t->record.end()) return {nullptr, ""};
      return {overwrite_default(it->second, t->chosen), "E-veri"};
    }

    case LTerm::K::Extract: {
      if (!is_value(t->a)) {  // E ::= E.l
        StepResult inner = eval_step(t->a, choose);
        if (inner.stuck()) return {nullptr, ""};
        return {LTerm::extract(inner.term, t->chosen), inner.rule};
      }
      if (t->a->k == LTerm::K::Promote)  // E-ex1
        return {overwrite_default(t->a->a, t->chosen), "E-ex1"};
      if (t->a->k == LTerm::K::VRecord) {  // E-ex2
        auto it = t->a->record.find(t->chosen);
        if (it == t->a->record.end()) return {nullptr, ""};
        return {overwrite_default(it->second, t->chosen), "E-ex2"};
      }
      return {nullptr, ""};
    }
  }
  return {nullptr, ""};
}

enum class EvalStatus { Value, Stuck, OutOfFuel };

struct EvalResult {
  LTermPtr term;
  EvalStatus status;
  std::vector<std::pair<std::string, LTermPtr>> trace;  // (rule, term after step)
};

inline EvalResult eval(LTermPtr t, int fuel, const LabelChoice& choose = newest_label_choice,
                       bool keep_trace = false) {
  if (fuel <= 0) throw Error("eval requires positive fuel");
  EvalResult out{t, EvalStatus::Value, {}};
  for (int i = 0; i < fuel; ++i) {
    if (is_value(out.term)) {
      out.status = EvalStatus::Value;
      return out;
    }
    StepResult s = eval_step(out.term, choose);
    if (s.stuck()) {
      out.status = EvalStatus::Stuck;
      return out;
    }
    out.term = s.term;
    if (keep_trace) out.trace.emplace_back(s.rule, s.term);
  }
  out.status = is_value(out.term) ? EvalStatus::Value : EvalStatus::OutOfFuel;
  return out;
}

// ---------------------------------------------------------------------------
// Declarative type checking (the oracle)
// ---------------------------------------------------------------------------

class DeclChecker {
 public:
  explicit DeclChecker(std::vector<VersionLabel> universe) : universe_(std::move(universe)) {}

  // True iff a derivation of gamma |- t : a exists. Both the context and
  // the type must be ground.
  bool check(const TypeEnv& gamma, const LTermPtr& t, const MTyPtr& a) {
    failing_ = nullptr;
    Env env;
    for (const auto& g : gamma) env.push_back({g.name, g.type, g.grade});
    auto usage = chk(env, t, a);
    bool ok = usage && fits(env, *usage);
    if (ok) failing_ = nullptr;
    return ok;
  }

  // Diagnostics mode: the subterm that failed to check last.
  LTermPtr failing_subterm() const { return failing_; }

 private:
  struct Entry {
    std::string name;
    MTyPtr type;
    std::optional<Resource> grade;  // nullopt = linear
  };
  using Env = std::vector<Entry>;

  // Minimal usage of one variable within a derivation.
  struct Use {
    enum class K { None, Linear, Grade } k = K::None;
    Resource grade = Resource::bottom();
  };
  using Usage = std::map<std::string, Use>;

  std::vector<VersionLabel> universe_;
  LTermPtr failing_;
  std::map<std::string, std::optional<Usage>> chk_memo_;
  std::map<std::string, std::vector<MTyPtr>> synth_memo_;

  static const Entry* find(const Env& env, const std::string& n) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->name == n) return &*it;
    return nullptr;
  }

  static std::string env_key(const Env& env) {
    std::string k;
    for (const auto& e : env) {
      k += e.name + ":" + ty_string(e.type);
      if (e.grade) k += "_" + e.grade->to_string();
      k += ";";
    }
    return k;
  }

  // Merging usages of the two sides of a context split. Linear twice is a
  // clash; grades join with +.
  static std::optional<Usage> merge(const Usage& u1, const Usage& u2) {
    Usage out = u1;
    for (const auto& [n, u] : u2) {
      auto it = out.find(n);
      if (it == out.end() || it->second.k == Use::K::None) {
        if (it == out.end())
          out[n] = u;
        else
          it->second = u;
        continue;
      }
      if (u.k == Use::K::None) continue;
      if (it->second.k == Use::K::Linear || u.k == Use::K::Linear) return std::nullopt;
      it->second.grade = res_add(it->second.grade, u.grade);
    }
    return out;
  }

  // Scales a usage through a promotion at grade r; fails on linear uses.
  static std::optional<Usage> scale(const Resource& r, const Usage& u) {
    Usage out;
    for (const auto& [n, use] : u) {
      if (use.k == Use::K::None) continue;
      if (use.k == Use::K::Linear) return std::nullopt;
      out[n] = Use{Use::K::Grade, res_mul(r, use.grade)};
    }
    return out;
  }

  // Whether the usage of bound/offered assumptions is derivable:
  // an unused graded assumption is discharged by weak+sub, a linear use of
  // a graded assumption goes through der+sub, grades compare with <=.
  static bool fits_one(const Entry& e, const Use& u) {
    if (!e.grade) return u.k == Use::K::Linear;
    switch (u.k) {
      case Use::K::None: return true;
      case Use::K::Linear: return !e.grade->is_bottom();  // der, then sub from unit
      case Use::K::Grade: return res_leq(u.grade, *e.grade);
    }
    return false;
  }

  bool fits(const Env& env, const Usage& u) {
    for (const auto& e : env) {
      auto it = u.find(e.name);
      Use use = it == u.end() ? Use{} : it->second;
      if (!fits_one(e, use)) return false;
    }
    return true;
  }

  std::vector<Resource> grade_candidates() const {
    // All subsets of the universe, plus bottom.
    std::vector<Resource> out{Resource::bottom()};
    std::size_t n = universe_.size();
    for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
      LabelSet s;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (std::size_t(1) << i)) s.insert(universe_[i]);
      out.push_back(Resource::labels(std::move(s)));
    }
    return out;
  }

  // Candidate types a term can synthesize. Proposals only; chk verifies.
  std::vector<MTyPtr> synth(const Env& env, const LTermPtr& t) {
    std::string key = lterm_key(t) + "|" + env_key(env);
    auto memo = synth_memo_.find(key);
    if (memo != synth_memo_.end()) return memo->second;
    synth_memo_[key] = {};  // cut cycles
    std::vector<MTyPtr> out;
    auto push_unique = [&](const MTyPtr& ty) {
      for (const auto& o : out)
        if (ty_equal(o, ty)) return;
      out.push_back(ty);
    };
    switch (t->k) {
      case LTerm::K::Int:
        push_unique(MTy::integer());
        break;
      case LTerm::K::Var:
        if (const Entry* e = find(env, t->name)) push_unique(e->type);
        break;
      case LTerm::K::App:
        for (const auto& f : synth(env, t->a))
          if (f->k == MTy::K::Arrow) push_unique(f->b);
        break;
      case LTerm::K::Lam: {
        if (!t->binder_ty) break;
        MTyPtr dom = *t->binder_ty;
        Env inner = env;
        if (!bind_pattern(inner, t->pattern, dom)) break;
        for (const auto& b : synth(inner, t->a)) push_unique(MTy::arrow(dom, b));
        break;
      }
      case LTerm::K::CLet:
        for (const auto& bt : synth(env, t->a)) {
          if (bt->k != MTy::K::Box) continue;
          Env inner = env;
          inner.push_back({t->name, bt->a, bt->res});
          for (const auto& b : synth(inner, t->b)) push_unique(b);
        }
        break;
      case LTerm::K::Promote:
        for (const auto& body : synth(env, t->a))
          for (const auto& r : grade_candidates()) push_unique(MTy::box(r, body));
        break;
      case LTerm::K::VRecord:
      case LTerm::K::VRecordAt: {
        if (t->record.empty()) break;
        LabelSet keys;
        for (const auto& [l, e] : t->record) keys.insert(l);
        for (const auto& body : synth(env, t->record.begin()->second)) {
          if (t->k == LTerm::K::VRecord)
            push_unique(MTy::box(Resource::labels(keys), body));
          else
            push_unique(body);
        }
        break;
      }
      case LTerm::K::Extract:
        for (const auto& u : synth(env, t->a))
          if (u->k == MTy::K::Box && !u->res.is_bottom() && u->res.is_labels() &&
              u->res.label_set().count(t->chosen))
            push_unique(u->a);
        break;
    }
    synth_memo_[key] = out;
    return out;
  }

  // Extends env with the bindings a pattern makes against the given type;
  // false when the pattern cannot match the type shape.
  static bool bind_pattern(Env& env, const MPatternPtr& p, const MTyPtr& ty) {
    switch (p->k) {
      case MPattern::K::Var:
        env.push_back({p->name, ty, std::nullopt});
        return true;
      case MPattern::K::Int:
        return ty->k == MTy::K::Int;  // pInt binds nothing
      case MPattern::K::Promote: {
        if (ty->k != MTy::K::Box || p->sub->k != MPattern::K::Var) return false;
        env.push_back({p->sub->name, ty->a, ty->res});
        return true;
      }
      case MPattern::K::Con:
        return false;  // data constructors are not part of the core calculus
    }
    return false;
  }

  // The pattern-bound entries sit at the end of env; verify their usage and
  // drop them from the result.
  static std::optional<Usage> discharge(const Env& env, std::size_t first_bound, Usage u) {
    for (std::size_t i = first_bound; i < env.size(); ++i) {
      auto it = u.find(env[i].name);
      Use use = it == u.end() ? Use{} : it->second;
      if (!fits_one(env[i], use)) return std::nullopt;
      if (it != u.end()) u.erase(it);
    }
    return u;
  }

  std::optional<Usage> chk(const Env& env, const LTermPtr& t, const MTyPtr& a) {
    std::string key = lterm_key(t) + "|" + env_key(env) + "|" + ty_string(a);
    auto memo = chk_memo_.find(key);
    if (memo != chk_memo_.end()) return memo->second;
    std::optional<Usage> result = chk_uncached(env, t, a);
    if (!result && !failing_) failing_ = t;
    chk_memo_[key] = result;
    return result;
  }

  std::optional<Usage> chk_uncached(const Env& env, const LTermPtr& t, const MTyPtr& a) {
    switch (t->k) {
      case LTerm::K::Int:
        if (a->k != MTy::K::Int) return std::nullopt;
        return Usage{};

      case LTerm::K::Var: {
        const Entry* e = find(env, t->name);
        if (!e || !ty_equal(e->type, a)) return std::nullopt;
        Usage u;
        if (!e->grade)
          u[t->name] = Use{Use::K::Linear, Resource::bottom()};
        else
          u[t->name] = Use{Use::K::Grade, Resource::unit()};  // der at the leaf
        return u;
      }

      case LTerm::K::Lam: {
        if (a->k != MTy::K::Arrow) return std::nullopt;
        if (t->binder_ty && !ty_equal(*t->binder_ty, a->a)) return std::nullopt;
        Env inner = env;
        std::size_t first = inner.size();
        if (!bind_pattern(inner, t->pattern, a->a)) return std::nullopt;
        auto u = chk(inner, t->a, a->b);
        if (!u) return std::nullopt;
        return discharge(inner, first, *u);
      }

      case LTerm::K::App: {
        std::vector<MTyPtr> domains;
        for (const auto& f : synth(env, t->a))
          if (f->k == MTy::K::Arrow && ty_equal(f->b, a)) domains.push_back(f->a);
        for (const auto& arg : synth(env, t->b)) domains.push_back(arg);
        for (const auto& dom : domains) {
          auto u1 = chk(env, t->a, MTy::arrow(dom, a));
          if (!u1) continue;
          auto u2 = chk(env, t->b, dom);
          if (!u2) continue;
          if (auto merged = merge(*u1, *u2)) return merged;
        }
        return std::nullopt;
      }

      case LTerm::K::CLet: {
        std::vector<MTyPtr> bound_tys;
        for (const auto& bt : synth(env, t->a))
          if (bt->k == MTy::K::Box) bound_tys.push_back(bt);
        for (const auto& bt : bound_tys) {
          auto u1 = chk(env, t->a, bt);
          if (!u1) continue;
          Env inner = env;
          inner.push_back({t->name, bt->a, bt->res});
          auto u2 = chk(inner, t->b, a);
          if (!u2) continue;
          auto u2d = discharge(inner, inner.size() - 1, *u2);
          if (!u2d) continue;
          if (auto merged = merge(*u1, *u2d)) return merged;
        }
        return std::nullopt;
      }

      case LTerm::K::Promote: {
        if (a->k != MTy::K::Box) return std::nullopt;
        auto u = chk(env, t->a, a->a);
        if (!u) return std::nullopt;
        return scale(a->res, *u);
      }

      case LTerm::K::VRecord: {
        if (a->k != MTy::K::Box || !a->res.is_labels()) return std::nullopt;
        LabelSet keys;
        for (const auto& [l, e] : t->record) keys.insert(l);
        if (a->res.label_set() != keys) return std::nullopt;
        Usage total;
        for (const auto& [l, e] : t->record) {
          auto u = chk(env, e, a->a);
          if (!u) return std::nullopt;
          auto scaled = scale(Resource::labels({l}), *u);
          if (!scaled) return std::nullopt;
          auto merged = merge(total, *scaled);
          if (!merged) return std::nullopt;
          total = *merged;
        }
        return total;
      }

      case LTerm::K::VRecordAt: {
        if (!t->record.count(t->chosen)) return std::nullopt;  // l_k in keys
        Usage total;
        for (const auto& [l, e] : t->record) {
          auto u = chk(env, e, a);
          if (!u) return std::nullopt;
          auto scaled = scale(Resource::labels({l}), *u);
          if (!scaled) return std::nullopt;
          auto merged = merge(total, *scaled);
          if (!merged) return std::nullopt;
          total = *merged;
        }
        return total;
      }

      case LTerm::K::Extract: {
        // extr: u : Box_r a with l in r; enumerate r over the universe.
        for (const auto& r : grade_candidates()) {
          if (!r.is_labels() || !r.label_set().count(t->chosen)) continue;
          if (auto u = chk(env, t->a, MTy::box(r, a))) return u;
        }
        return std::nullopt;
      }
    }
    return std::nullopt;
  }
};

// Bridges a core VLMini term (the image of the translation) into lambda-VL
// for the oracle, annotating lambda binders with their solved types.
inline LTermPtr to_lambdavl(const MTermPtr& t, const std::map<const MTerm*, MTyPtr>& binders,
                            const Subst& solution) {
  switch (t->k) {
    case MTerm::K::Int: return LTerm::integer(t->value);
    case MTerm::K::Var: return LTerm::var(t->name);
    case MTerm::K::App:
      return LTerm::app(to_lambdavl(t->a, binders, solution), to_lambdavl(t->b, binders, solution));
    case MTerm::K::Lam: {
      std::optional<MTyPtr> ann;
      auto it = binders.find(t.get());
      if (it != binders.end()) ann = apply_subst(solution, it->second);
      return LTerm::lam(t->pattern, to_lambdavl(t->a, binders, solution), ann);
    }
    case MTerm::K::Promote:
      return LTerm::promote(to_lambdavl(t->a, binders, solution));
    default:
      throw Error("term has no lambda-VL counterpart: " + term_string(t));
  }
}

}  // namespace vl
