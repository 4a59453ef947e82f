#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"
#include "vl/core_parse.hpp"
#include "vl/lambdavl.hpp"

using namespace vl;

namespace {

const VersionLabel L1 = VersionLabel::of({{"M", "1.0.0"}});
const VersionLabel L2 = VersionLabel::of({{"M", "2.0.0"}});

DeclChecker checker() { return DeclChecker({L1, L2}); }

// The target types used to probe enumerated candidates.
std::vector<MTyPtr> type_pool() {
  std::vector<MTyPtr> pool{MTy::integer()};
  std::vector<Resource> grades{Resource::bottom(), Resource::unit(), Resource::labels({L1}),
                               Resource::labels({L2}), Resource::labels({L1, L2})};
  for (const auto& r : grades) pool.push_back(MTy::box(r, MTy::integer()));
  vltest::LvlEnumerator e;
  for (const auto& bt : e.binder_types()) {
    pool.push_back(MTy::arrow(bt, MTy::integer()));
    pool.push_back(MTy::box(Resource::labels({L1, L2}), MTy::arrow(bt, MTy::integer())));
  }
  return pool;
}

}  // namespace

TEST_CASE("declarative checking of basic judgments") {
  DeclChecker ck = checker();
  CHECK(ck.check(TypeEnv{}, LTerm::integer(42), MTy::integer()));
  CHECK_FALSE(ck.check(TypeEnv{}, LTerm::integer(42), MTy::arrow(MTy::integer(), MTy::integer())));

  // Promotion at a chosen grade.
  CHECK(ck.check(TypeEnv{}, LTerm::promote(LTerm::integer(42)),
                 MTy::box(Resource::labels({L1}), MTy::integer())));
  CHECK(ck.check(TypeEnv{}, LTerm::promote(LTerm::integer(42)),
                 MTy::box(Resource::bottom(), MTy::integer())));

  // Extraction from a record at a label it does not carry.
  VersionLabel l3 = VersionLabel::of({{"M", "3.0.0"}});
  DeclChecker ck3 = DeclChecker({L1, L2, l3});
  LTermPtr bad = LTerm::extract(
      LTerm::vrecord({{L1, LTerm::integer(1)}, {L2, LTerm::integer(2)}}), l3);
  CHECK_FALSE(ck3.check(TypeEnv{}, bad, MTy::integer()));
  LTermPtr good = LTerm::extract(
      LTerm::vrecord({{L1, LTerm::integer(1)}, {L2, LTerm::integer(2)}}), L1);
  CHECK(ck3.check(TypeEnv{}, good, MTy::integer()));
}

TEST_CASE("linear and graded assumptions") {
  DeclChecker ck = checker();
  TypeEnv lin;
  lin.push_linear("x", MTy::integer());
  CHECK(ck.check(lin, LTerm::var("x"), MTy::integer()));
  CHECK_FALSE(ck.check(lin, LTerm::integer(1), MTy::integer()));  // unused linear

  TypeEnv gr;
  gr.push_graded("x", MTy::integer(), Resource::labels({L1}));
  CHECK(ck.check(gr, LTerm::var("x"), MTy::integer()));  // der + sub
  CHECK(ck.check(gr, LTerm::integer(1), MTy::integer()));  // weak + sub

  TypeEnv bot;
  bot.push_graded("x", MTy::integer(), Resource::bottom());
  CHECK_FALSE(ck.check(bot, LTerm::var("x"), MTy::integer()));  // unusable grade

  // A linear variable cannot be promoted.
  CHECK_FALSE(ck.check(lin, LTerm::promote(LTerm::var("x")),
                       MTy::box(Resource::labels({L1}), MTy::integer())));
  // A graded one can, up to its grade.
  CHECK(ck.check(gr, LTerm::promote(LTerm::var("x")),
                 MTy::box(Resource::labels({L1}), MTy::integer())));
  CHECK_FALSE(ck.check(gr, LTerm::promote(LTerm::var("x")),
                       MTy::box(Resource::labels({L1, L2}), MTy::integer())));
}

TEST_CASE("default version overwriting") {
  LTermPtr t = LTerm::integer(1);
  CHECK(lterm_equal(overwrite_default(LTerm::promote(t), L2), LTerm::promote(t)));

  LTermPtr lam = LTerm::lam(MPattern::var("x"),
                            LTerm::extract(LTerm::promote(LTerm::var("x")), L1));
  LTermPtr moved = overwrite_default(lam, L2);
  CHECK(lterm_string(moved) == lterm_string(lam));  // extraction labels are preserved

  LTermPtr at = LTerm::vrecord_at({{L1, LTerm::integer(1)}, {L2, LTerm::integer(2)}}, L1);
  LTermPtr retargeted = overwrite_default(at, L2);
  CHECK(retargeted->chosen == L2);
  VersionLabel l9 = VersionLabel::of({{"M", "9.0.0"}});
  CHECK(overwrite_default(at, l9)->chosen == L1);  // not a key: unchanged

  // (\p.t)@l pushes into the body: a record-at inside a lambda retargets.
  LTermPtr lam2 = LTerm::lam(MPattern::var("y"), at);
  CHECK(overwrite_default(lam2, L2)->a->chosen == L2);
}

TEST_CASE("small-step reduction rules") {
  // E-ex1: [42].l1 ~> 42@l1 = 42
  StepResult s1 = eval_step(LTerm::extract(LTerm::promote(LTerm::integer(42)), L1));
  REQUIRE(!s1.stuck());
  CHECK(s1.rule == "E-ex1");
  CHECK(s1.term->value == 42);

  // E-ex2: <l1=1, l2=2>.l1 ~> 1
  StepResult s2 = eval_step(
      LTerm::extract(LTerm::vrecord({{L1, LTerm::integer(1)}, {L2, LTerm::integer(2)}}), L1));
  REQUIRE(!s2.stuck());
  CHECK(s2.rule == "E-ex2");
  CHECK(s2.term->value == 1);

  // E-clet: let [x] = [5] in x ~> 5
  StepResult s3 = eval_step(LTerm::clet("x", LTerm::promote(LTerm::integer(5)), LTerm::var("x")));
  REQUIRE(!s3.stuck());
  CHECK(s3.rule == "E-clet");
  CHECK(s3.term->value == 5);

  // E-veri: <l1=1, l2=2 | l1> ~> 1
  EvalResult r = eval(LTerm::vrecord_at({{L1, LTerm::integer(1)}, {L2, LTerm::integer(2)}}, L1), 10);
  CHECK(r.status == EvalStatus::Value);
  CHECK(r.term->value == 1);

  // E-abs1 and E-abs2.
  StepResult s4 = eval_step(LTerm::app(LTerm::lam(MPattern::var("x"), LTerm::var("x")),
                                       LTerm::integer(3)));
  CHECK(s4.rule == "E-abs1");
  CHECK(s4.term->value == 3);
  StepResult s5 = eval_step(
      LTerm::app(LTerm::lam(MPattern::promote(MPattern::var("x")), LTerm::var("x")),
                 LTerm::promote(LTerm::integer(3))));
  CHECK(s5.rule == "E-abs2");
  CHECK(s5.term->k == LTerm::K::CLet);

  // Values do not step.
  CHECK(eval_step(LTerm::integer(7)).stuck());
  CHECK(eval(LTerm::integer(7), 5).status == EvalStatus::Value);
}

TEST_CASE("record eliminations choose by the configured policy") {
  // let [f] = <l1=.., l2=..> in f binds f to a record-at; the default
  // policy chooses the newest label.
  LTermPtr t = LTerm::clet(
      "f", LTerm::vrecord({{L1, LTerm::integer(1)}, {L2, LTerm::integer(2)}}), LTerm::var("f"));
  EvalResult newest = eval(t, 10);
  CHECK(newest.term->value == 2);
  EvalResult oldest = eval(t, 10, [](const std::vector<VersionLabel>& ls) { return ls.front(); });
  CHECK(oldest.term->value == 1);
}

TEST_CASE("the section-2 hash application extracts per label") {
  // app := let [mkHash'] = <l1=\s.1, l2=\s.2> in let [s] = [99] in [mkHash' s]
  auto body = [&](const VersionLabel& pick) {
    LTermPtr record = LTerm::vrecord({{L1, LTerm::lam(MPattern::var("s"), LTerm::integer(1))},
                                      {L2, LTerm::lam(MPattern::var("s"), LTerm::integer(2))}});
    LTermPtr app = LTerm::clet(
        "mh", record,
        LTerm::clet("s", LTerm::promote(LTerm::integer(99)),
                    LTerm::promote(LTerm::app(LTerm::var("mh"), LTerm::var("s")))));
    return LTerm::extract(app, pick);
  };
  EvalResult at1 = eval(body(L1), 64);
  REQUIRE(at1.status == EvalStatus::Value);
  CHECK(at1.term->value == 1);  // the l1 body runs
  EvalResult at2 = eval(body(L2), 64);
  REQUIRE(at2.status == EvalStatus::Value);
  CHECK(at2.term->value == 2);
}

TEST_CASE("core term parser round trips") {
  LTermPtr t = parse_core_term(
      "(let [x] = <{M=1.0.0} = 1, {M=2.0.0} = 2> in [x]).{M=1.0.0}");
  REQUIRE(t->k == LTerm::K::Extract);
  EvalResult r = eval(t, 32);
  REQUIRE(r.status == EvalStatus::Value);
  // The binding substitutes a record-at, extraction retargets it to l1,
  // and E-veri finishes the evaluation with the l1 entry.
  CHECK(r.term->value == 1);

  LTermPtr lam = parse_core_term("\\[x] -> x 1");
  REQUIRE(lam->k == LTerm::K::Lam);
  CHECK(lam->pattern->k == MPattern::K::Promote);
}

TEST_CASE("preservation and progress over the enumerated corpus") {
  DeclChecker ck = checker();
  vltest::LvlEnumerator en(9000);
  auto pool = type_pool();
  auto candidates = en.terms(4);

  int well_typed = 0, steps_checked = 0;
  for (const auto& t : candidates) {
    MTyPtr ty = nullptr;
    for (const auto& candidate_ty : pool) {
      if (ck.check(TypeEnv{}, t, candidate_ty)) {
        ty = candidate_ty;
        break;
      }
    }
    if (!ty) continue;
    ++well_typed;

    // Progress: a closed well-typed non-value steps.
    if (!is_value(t)) {
      StepResult s = eval_step(t);
      INFO("progress: " << lterm_string(t) << " : " << ty_string(ty));
      REQUIRE(!s.stuck());
    }

    // Preservation along the whole evaluation (up to a step budget).
    LTermPtr cur = t;
    for (int k = 0; k < 32 && !is_value(cur); ++k) {
      StepResult s = eval_step(cur);
      REQUIRE(!s.stuck());
      cur = s.term;
      INFO("preservation: " << lterm_string(t) << " ~> " << lterm_string(cur) << " : "
                            << ty_string(ty));
      REQUIRE(ck.check(TypeEnv{}, cur, ty));
      ++steps_checked;
    }
  }
  INFO("well-typed corpus size: " << well_typed);
  CHECK(well_typed >= 300);
  CHECK(steps_checked >= 100);
}

TEST_CASE("type-safe extraction for versioned values") {
  DeclChecker ck = checker();
  vltest::LvlEnumerator en(1500);
  std::vector<Resource> grades{Resource::labels({L1}), Resource::labels({L2}),
                               Resource::labels({L1, L2})};
  int tested = 0;
  for (const auto& u : en.terms(3)) {
    if (!is_versioned_value(u)) continue;
    for (const auto& r : grades) {
      MTyPtr boxed = MTy::box(r, MTy::integer());
      if (!ck.check(TypeEnv{}, u, boxed)) continue;
      for (const auto& l : r.label_set()) {
        LTermPtr ex = LTerm::extract(u, l);
        StepResult s = eval_step(ex);
        INFO(lterm_string(ex));
        REQUIRE(!s.stuck());
        REQUIRE(ck.check(TypeEnv{}, s.term, MTy::integer()));
        ++tested;
      }
    }
  }
  CHECK(tested >= 50);
}

TEST_CASE("diagnostics mode reports a failing subterm") {
  DeclChecker ck = checker();
  // The record lacks l3, so the extraction cannot type.
  VersionLabel l3 = VersionLabel::of({{"M", "3.0.0"}});
  DeclChecker ck3 = DeclChecker({L1, L2, l3});
  LTermPtr bad = LTerm::app(
      LTerm::lam(MPattern::var("x"), LTerm::var("x"), MTy::integer()),
      LTerm::extract(LTerm::vrecord({{L1, LTerm::integer(1)}}), l3));
  CHECK_FALSE(ck3.check(TypeEnv{}, bad, MTy::integer()));
  CHECK(ck3.failing_subterm() != nullptr);
}

TEST_CASE("the core printer and parser agree on enumerated terms") {
  vltest::LvlEnumerator en(800);
  int round_tripped = 0;
  for (const auto& t : en.terms(3)) {
    LTermPtr again = parse_core_term(lterm_string(t));
    INFO(lterm_string(t));
    REQUIRE(lterm_equal(t, again));
    ++round_tripped;
  }
  CHECK(round_tripped >= 500);
}
