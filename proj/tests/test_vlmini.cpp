#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"
#include "vl/infer.hpp"
#include "vl/vlmini.hpp"

using namespace vl;

namespace {

VersionLabel lbl(const std::string& av, const std::string& bv) {
  return VersionLabel({{"A", av}, {"B", bv}});
}

bool env_equal_unordered(const TypeEnv& a, const TypeEnv& b) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a) {
    const Assumption* y = b.lookup(x.name);
    if (!y || x.linear() != y->linear() || !ty_equal(x.type, y->type)) return false;
    if (!x.linear() && !(*x.grade == *y->grade)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("context concatenation") {
  TypeEnv empty, g;
  g.push_graded("x", MTy::integer(), Resource::labels({lbl("1.0.0", "1.0.0")}));
  CHECK(env_equal_unordered(ctx_concat(empty, g), g));

  TypeEnv g1, g2;
  g1.push_graded("x", MTy::integer(), Resource::labels({lbl("1.0.0", "1.0.0")}));
  g2.push_graded("x", MTy::integer(), Resource::labels({lbl("2.0.0", "1.0.0")}));
  TypeEnv merged = ctx_concat(g1, g2);
  REQUIRE(merged.size() == 1);
  CHECK(*merged.lookup("x")->grade ==
        Resource::labels({lbl("1.0.0", "1.0.0"), lbl("2.0.0", "1.0.0")}));

  TypeEnv l1, l2;
  l1.push_linear("x", MTy::integer());
  l2.push_linear("x", MTy::integer());
  CHECK_THROWS_AS(ctx_concat(l1, l2), LinearClash);

  TypeEnv t1, t2;
  t1.push_graded("x", MTy::integer(), Resource::var("r"));
  t2.push_graded("x", MTy::arrow(MTy::integer(), MTy::integer()), Resource::var("s"));
  CHECK_THROWS_AS(ctx_concat(t1, t2), TypeMismatch);
}

TEST_CASE("context scaling") {
  Resource r = Resource::labels({lbl("1.0.0", "1.0.0")});
  CHECK(ctx_scale(r, TypeEnv{}).empty());

  TypeEnv g;
  g.push_graded("x", MTy::integer(), Resource::labels({lbl("2.0.0", "1.0.0")}));
  TypeEnv scaled = ctx_scale(r, g);
  CHECK(*scaled.lookup("x")->grade ==
        Resource::labels({lbl("1.0.0", "1.0.0"), lbl("2.0.0", "1.0.0")}));

  TypeEnv lin;
  lin.push_linear("x", MTy::integer());
  CHECK_THROWS_AS(ctx_scale(r, lin), LinearInScaledContext);
}

TEST_CASE("distribution of scaling over concatenation") {
  auto uni = label_universe(vltest::registry_2x2());
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    TypeEnv g;
    g.push_graded("x", MTy::integer(), vltest::random_resource(rng, uni));
    g.push_graded("y", MTy::integer(), vltest::random_resource(rng, uni));
    Resource r1 = vltest::random_resource(rng, uni);
    Resource r2 = vltest::random_resource(rng, uni);
    TypeEnv lhs = ctx_concat(ctx_scale(r1, g), ctx_scale(r2, g));
    TypeEnv rhs = ctx_scale(res_add(r1, r2), g);
    REQUIRE(env_equal_unordered(lhs, rhs));
  }
}

TEST_CASE("concatenation is commutative and associative up to reordering") {
  auto uni = label_universe(vltest::registry_2x2());
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    TypeEnv a, b, c;
    a.push_graded("x", MTy::integer(), vltest::random_resource(rng, uni));
    b.push_graded("x", MTy::integer(), vltest::random_resource(rng, uni));
    b.push_graded("y", MTy::integer(), vltest::random_resource(rng, uni));
    c.push_graded("y", MTy::integer(), vltest::random_resource(rng, uni));
    REQUIRE(env_equal_unordered(ctx_concat(a, b), ctx_concat(b, a)));
    REQUIRE(env_equal_unordered(ctx_concat(ctx_concat(a, b), c),
                                ctx_concat(a, ctx_concat(b, c))));
  }
}

TEST_CASE("substitution application") {
  Subst s;
  s.ty["a0"] = MTy::integer();
  MTyPtr arrow = MTy::arrow(MTy::tyvar("a0"), MTy::tyvar("a0"));
  CHECK(ty_string(apply_subst(s, arrow)) == "Int → Int");

  MTyPtr boxed = MTy::box(Resource::var("r"), MTy::tyvar("b0"));
  CHECK(ty_equal(apply_subst(s, boxed), boxed));  // disjoint variable untouched

  Subst eta;
  eta.res.insert({"r", Resource::labels({lbl("1.0.0", "1.0.0")})});
  MTyPtr ground = apply_subst(eta, MTy::box(Resource::var("r"), MTy::integer()));
  CHECK(ground->res == Resource::labels({lbl("1.0.0", "1.0.0")}));

  // Concrete labels are fixpoints.
  MTyPtr fixed = MTy::box(Resource::labels({lbl("1.0.0", "1.0.0")}), MTy::integer());
  CHECK(ty_equal(apply_subst(eta, fixed), fixed));

  Subst bad;
  bad.res.insert({"a0", Resource::bottom()});
  CHECK_THROWS_AS(apply_subst(bad, MTy::tyvar("a0")), KindError);
}

TEST_CASE("substitution composition") {
  Subst empty;
  Subst t;
  t.ty["a"] = MTy::integer();
  Subst r1 = subst_compose(empty, t);
  CHECK(ty_equal(r1.ty.at("a"), MTy::integer()));

  Subst t2;
  t2.ty["b"] = MTy::integer();
  Subst r2 = subst_compose(t, t2);
  CHECK(r2.ty.size() == 2);

  // Collision: both bind a; images unify and the result folds in.
  Subst left;
  left.ty["a"] = MTy::tyvar("b");
  Subst right;
  right.ty["a"] = MTy::integer();
  Subst r3 = subst_compose(left, right);
  CHECK(ty_equal(r3.ty.at("a"), MTy::integer()));
  CHECK(ty_equal(r3.ty.at("b"), MTy::integer()));

  // Colliding images that cannot unify fail.
  Subst bad;
  bad.ty["a"] = MTy::arrow(MTy::integer(), MTy::integer());
  CHECK_THROWS_AS(subst_compose(right, bad), UnifyMismatch);
}

TEST_CASE("composition agrees with sequential application") {
  // a after b, on instances where both substitute types for variables.
  Subst a, b;
  a.ty["x"] = MTy::integer();
  b.ty["y"] = MTy::arrow(MTy::tyvar("x"), MTy::tyvar("x"));
  Subst ab = subst_compose(a, b);
  for (const auto& probe :
       {MTy::tyvar("x"), MTy::tyvar("y"), MTy::arrow(MTy::tyvar("y"), MTy::tyvar("x"))}) {
    CHECK(ty_equal(apply_subst(ab, probe), apply_subst(a, apply_subst(b, probe))));
  }
}

TEST_CASE("constraint substitution renames variables") {
  DepPtr c = DepConstraint::conj(DepConstraint::var_dep("a", "b"),
                                 DepConstraint::label_dep("a", {{"A", "1.0.0"}}));
  Subst rename;
  rename.res.insert({"a", Resource::var("a9")});
  DepPtr renamed = apply_subst(rename, c);
  std::set<std::string> vars;
  constraint_vars(renamed, vars);
  CHECK(vars == std::set<std::string>{"a9", "b"});
}

TEST_CASE("composed substitutions are idempotent") {
  Subst a, b;
  a.ty["x"] = MTy::tyvar("y");
  b.ty["y"] = MTy::integer();
  Subst ab = subst_compose(a, b);
  for (const auto& probe : {MTy::tyvar("x"), MTy::tyvar("y")}) {
    MTyPtr once = apply_subst(ab, probe);
    CHECK(ty_equal(once, apply_subst(ab, once)));
  }
  CHECK(ty_equal(ab.ty.at("x"), MTy::integer()));
}
