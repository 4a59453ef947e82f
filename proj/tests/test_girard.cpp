#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"
#include "vl/girard.hpp"
#include "vl/parser.hpp"

using namespace vl;

namespace {

// Structural scan over forward images: every application argument is a
// promotion and every lambda binds a promoted pattern.
void assert_translated_shape(const MTermPtr& t) {
  switch (t->k) {
    case MTerm::K::App:
      // Arguments are promoted; an unversion is already a versioned value.
      REQUIRE((t->b->k == MTerm::K::Promote || t->b->k == MTerm::K::Unversion));
      assert_translated_shape(t->a);
      assert_translated_shape(t->b);
      return;
    case MTerm::K::Lam:
      REQUIRE(t->pattern->k == MPattern::K::Promote);
      assert_translated_shape(t->a);
      return;
    case MTerm::K::Con:
      for (const auto& a : t->args) assert_translated_shape(a);
      return;
    case MTerm::K::Case:
      assert_translated_shape(t->a);
      for (const auto& br : t->branches) assert_translated_shape(br.body);
      return;
    default:
      if (t->a) assert_translated_shape(t->a);
      if (t->b) assert_translated_shape(t->b);
      return;
  }
}

}  // namespace

TEST_CASE("forward translation equations") {
  MTermPtr id = forward_translate(parse_term("\\x -> x"));
  REQUIRE(id->k == MTerm::K::Lam);
  CHECK(term_string(id) == "λ[x].x");

  MTermPtr app = forward_translate(parse_term("f s"));
  REQUIRE(app->k == MTerm::K::App);
  CHECK(app->b->k == MTerm::K::Promote);
  CHECK(term_string(app) == "f [s]");

  MTermPtr n = forward_translate(parse_term("42"));
  CHECK(n->k == MTerm::K::Int);
  CHECK(n->value == 42);
}

TEST_CASE("let becomes the contextual-let sugar") {
  MTermPtr t = forward_translate(parse_term("let x = f 1 in x"));
  // (\[x].x) [f [1]]
  REQUIRE(t->k == MTerm::K::App);
  REQUIRE(t->a->k == MTerm::K::Lam);
  CHECK(t->a->pattern->k == MPattern::K::Promote);
  REQUIRE(t->b->k == MTerm::K::Promote);
  CHECK(t->b->a->k == MTerm::K::App);
}

TEST_CASE("unversion operands are wrapped as versioned values") {
  MTermPtr t = forward_translate(parse_term("unversion (sortVector vec)"));
  REQUIRE(t->k == MTerm::K::Unversion);
  REQUIRE(t->a->k == MTerm::K::Promote);
  CHECK(t->a->a->k == MTerm::K::App);
}

TEST_CASE("ver-of passes through to the core term") {
  MTermPtr t = forward_translate(parse_term("ver [Hash = 1.0.0] of (exists digest)"));
  REQUIRE(t->k == MTerm::K::VerOf);
  CHECK(t->label == PartialLabel{{"Hash", "1.0.0"}});
  CHECK(t->a->k == MTerm::K::App);
}

TEST_CASE("reverse translation erases the coeffect structure") {
  MTermPtr lam = MTerm::lam(MPattern::promote(MPattern::var("x")), MTerm::var("x"));
  CHECK(vl::term_string(reverse_translate(lam)) == "\\x -> x");

  MTermPtr app = MTerm::app(MTerm::var("f"), MTerm::promote(MTerm::var("s")));
  CHECK(vl::term_string(reverse_translate(app)) == "f s");

  // (\[x].t2) [t1] is recognized as a let.
  MTermPtr let_shape = MTerm::app(MTerm::lam(MPattern::promote(MPattern::var("x")),
                                             MTerm::var("x")),
                                  MTerm::promote(MTerm::integer(5)));
  STermPtr back = reverse_translate(let_shape);
  REQUIRE(back->kind == STerm::Kind::Let);
  CHECK(back->name == "x");
  CHECK(back->a->value == 5);
}

TEST_CASE("round trip is the identity modulo let sugar") {
  std::vector<std::string> sources = {
      "\\x -> x",
      "let x = f 1 in (x, g x)",
      "(\\x -> x) 3",  // beta redex normalizes to a let
      "case v of { [] -> 0; h : t -> h + 1 }",
      "[1, 2, 3]",
  };
  for (const auto& src : sources) {
    STermPtr t = parse_term(src);
    STermPtr round = reverse_translate(forward_translate(t));
    INFO(src << "  ~~>  " << term_string(round));
    CHECK(term_equal(round, let_normalize(t)));
  }
  // Version-control wrappers erase on the way back; that is what code
  // generation relies on.
  CHECK(term_string(reverse_translate(forward_translate(parse_term("unversion (f 1)")))) ==
        "f 1");
  CHECK(term_string(reverse_translate(
            forward_translate(parse_term("ver [Hash = 1.0.0] of (f 1)")))) == "f 1");
  for (const auto& t : vltest::closed_surface_terms(3, 400)) {
    STermPtr round = reverse_translate(forward_translate(t));
    INFO(term_string(t));
    REQUIRE(term_equal(round, let_normalize(t)));
  }
}

TEST_CASE("forward images have promoted arguments and binders everywhere") {
  for (const auto& t : vltest::closed_surface_terms(3, 400))
    assert_translated_shape(forward_translate(t));
  assert_translated_shape(forward_translate(
      parse_term("case f (1, [2]) of { (a, b) -> unversion (g a) ; _ -> h 1 }")));
}
