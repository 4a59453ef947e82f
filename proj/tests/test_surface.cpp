#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "testutil.hpp"
#include "vl/parser.hpp"
#include "vl/repo.hpp"

using namespace vl;

TEST_CASE("parses the identity module") {
  SurfaceModule m = parse_module("module M where\nid x = x");
  CHECK(m.name == "M");
  REQUIRE(m.defs.size() == 1);
  CHECK(m.defs[0].symbol == "id");
  const STermPtr& body = m.defs[0].body;
  REQUIRE(body->kind == STerm::Kind::Lam);
  CHECK(body->name == "x");
  CHECK(body->a->kind == STerm::Kind::Var);
  CHECK(body->a->name == "x");
}

TEST_CASE("parses the hash app with a version pin") {
  std::string src =
      "module App where\n"
      "import Dir\n"
      "import Hash\n"
      "main =\n"
      "  let s = 42 in\n"
      "  let digest = mkHash s in\n"
      "  if ver [Hash=1.0.0] of (exists digest)\n"
      "    then 1\n"
      "    else 0\n";
  SurfaceModule m = parse_module(src);
  CHECK(m.imports == std::vector<ModuleName>{"Dir", "Hash"});

  // Find the ver-of node: the `if` has desugared into a case whose
  // scrutinee is the pinned application.
  std::function<STermPtr(const STermPtr&)> find_ver = [&](const STermPtr& t) -> STermPtr {
    if (t->kind == STerm::Kind::VerOf) return t;
    if (t->a)
      if (auto r = find_ver(t->a)) return r;
    if (t->b)
      if (auto r = find_ver(t->b)) return r;
    for (const auto& br : t->branches)
      if (auto r = find_ver(br.body)) return r;
    return nullptr;
  };
  STermPtr ver = find_ver(m.defs[0].body);
  REQUIRE(ver);
  CHECK(ver->label == PartialLabel{{"Hash", "1.0.0"}});
  REQUIRE(ver->a->kind == STerm::Kind::App);
  CHECK(ver->a->a->name == "exists");
  CHECK(ver->a->b->name == "digest");
}

TEST_CASE("parses unversion around an application") {
  SurfaceModule m = parse_module("module M where\nf = unversion (g 1)");
  const STermPtr& body = m.defs[0].body;
  REQUIRE(body->kind == STerm::Kind::Unversion);
  REQUIRE(body->a->kind == STerm::Kind::App);
  CHECK(body->a->a->name == "g");
  CHECK(body->a->b->value == 1);
}

TEST_CASE("if desugars to a two-branch case on integers") {
  STermPtr t = parse_term("if c then 1 else 2");
  REQUIRE(t->kind == STerm::Kind::Case);
  REQUIRE(t->branches.size() == 2);
  CHECK(t->branches[0].pattern->kind == SPattern::Kind::Int);
  CHECK(t->branches[0].pattern->value == 1);
  CHECK(t->branches[1].pattern->kind == SPattern::Kind::Var);
}

TEST_CASE("duplicate definitions are rejected") {
  CHECK_THROWS_AS(parse_module("module M where\nf = 1\nf = 2"), DuplicateDefinition);
}

TEST_CASE("syntax errors carry spans and expectations") {
  try {
    parse_module("module M where\nf = (1");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.span.line == 2);
    CHECK(std::string(e.what()).find("expected") != std::string::npos);
  }
}

TEST_CASE("operator precedence and list sugar") {
  STermPtr t = parse_term("1 + 2 * 3");
  REQUIRE(t->kind == STerm::Kind::BinOp);
  CHECK(t->op == BinOpKind::Add);
  CHECK(t->b->op == BinOpKind::Mul);

  STermPtr l = parse_term("[1, 2]");
  REQUIRE(l->kind == STerm::Kind::Cons);
  CHECK(l->a->value == 1);
  REQUIRE(l->b->kind == STerm::Kind::Cons);
  CHECK(l->b->b->kind == STerm::Kind::Nil);

  STermPtr c = parse_term("case xs of { [] -> 0; h : t -> h }");
  REQUIRE(c->branches.size() == 2);
  CHECK(c->branches[0].pattern->kind == SPattern::Kind::Nil);
  CHECK(c->branches[1].pattern->kind == SPattern::Kind::Cons);
}

TEST_CASE("print-parse fixpoint on enumerated and sample terms") {
  std::vector<std::string> sources = {
      "\\x -> x",
      "let x = f 1 in (x, g x)",
      "case v of { (a, b) -> a + b; _ -> 0 }",
      "ver [Hash = 1.0.0] of (exists digest)",
      "unversion (sortVector vec)",
      "[1, 2, 3]",
      "1 : 2 : []",
      "f (g 1) (h 2)",
  };
  for (const auto& src : sources) {
    STermPtr once = parse_term(src);
    STermPtr twice = parse_term(term_string(once));
    INFO(src << "  ~~>  " << term_string(once));
    CHECK(term_equal(once, twice));
  }
  for (const auto& t : vltest::closed_surface_terms(3, 300)) {
    STermPtr again = parse_term(term_string(t));
    INFO(term_string(t));
    REQUIRE(term_equal(t, again));
  }
}

TEST_CASE("every node's span lies inside the source") {
  std::string src =
      "module M where\n"
      "f x = case x of { 0 -> [1, 2]; y -> (y, y + 1) }\n";
  SurfaceModule m = parse_module(src);
  std::function<void(const STermPtr&)> walk = [&](const STermPtr& t) {
    CHECK(t->span.begin <= t->span.end);
    CHECK(t->span.end <= src.size());
    if (t->a) walk(t->a);
    if (t->b) walk(t->b);
    for (const auto& br : t->branches) walk(br.body);
  };
  walk(m.defs[0].body);
}

TEST_CASE("loads a one-module repository") {
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / "vl_test_single";
  fs::remove_all(root);
  fs::create_directories(root / "List" / "1.0.0");
  std::ofstream(root / "List" / "1.0.0" / "List.vl") << "module List where\nempty = []\n";
  Repository repo = load_repository(root);
  CHECK(repo.modules.size() == 1);
  CHECK(repo.at("List", "1.0.0").defs[0].symbol == "empty");
}

TEST_CASE("loads the matrix case study in dependency order") {
  Repository repo = load_repository(vltest::samples_dir() / "matrix");
  CHECK(repo.modules.size() == 4);  // List, Matrix x2, Main
  auto pos = [&](const ModuleName& m) {
    return std::find(repo.topo_order.begin(), repo.topo_order.end(), m) -
           repo.topo_order.begin();
  };
  CHECK(pos("List") < pos("Matrix"));
  CHECK(pos("Matrix") < pos("Main"));
}

TEST_CASE("missing versions and cycles are reported") {
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / "vl_test_cycle";
  fs::remove_all(root);
  fs::create_directories(root / "A" / "1.0.0");
  fs::create_directories(root / "B" / "1.0.0");
  std::ofstream(root / "A" / "1.0.0" / "A.vl") << "module A where\nimport B\nf = g\n";
  std::ofstream(root / "B" / "1.0.0" / "B.vl") << "module B where\nimport A\ng = f\n";
  CHECK_THROWS_AS(load_repository(root), ImportCycle);

  ModuleRegistry reg;
  reg.add_module("A", {"1.0.0", "9.9.9"});
  CHECK_THROWS_AS(load_repository(root, reg), MissingModuleVersion);
}

TEST_CASE("recursion and unbound names are rejected at load time") {
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / "vl_test_rec";
  fs::remove_all(root);
  fs::create_directories(root / "A" / "1.0.0");
  std::ofstream(root / "A" / "1.0.0" / "A.vl") << "module A where\nf x = f x\n";
  CHECK_THROWS_AS(load_repository(root), RecursiveDefinition);

  std::ofstream(root / "A" / "1.0.0" / "A.vl") << "module A where\nf x = mystery x\n";
  CHECK_THROWS_AS(load_repository(root), UnboundVariable);
}
