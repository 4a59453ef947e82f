#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "testutil.hpp"
#include "vl/driver.hpp"

using namespace vl;

TEST_CASE("the hash case study resolves to the newest consistent versions") {
  Repository repo = load_repository(vltest::samples_dir() / "hashapp");
  CompiledUnit unit = compile_unit(repo, "App");

  // Every expression main depends on sits at {Dir = 1.0.0, Hash = 2.0.0}.
  const DefRecord& main_rec = unit.records.at({"App", "1.0.0", "main"});
  VersionLabel expected = VersionLabel::of({{"Dir", "1.0.0"}, {"Hash", "2.0.0"}});
  for (const auto& [occ, meta] : main_rec.occurrences)
    CHECK(unit.solution.at(meta.outer_var) == expected);

  STermPtr v = run_entry(unit);
  CHECK(v->value == 1);  // digest made and checked under one version: found
}

TEST_CASE("the version pin flips the cluster to 1.0.0") {
  Repository repo = load_repository(vltest::samples_dir() / "hashapp_pinned");
  CompiledUnit unit = compile_unit(repo, "App");
  SpecializedProgram prog = specialize_entry(unit);
  CHECK(prog.find("mkHash__Hash__1_0_0"));
  CHECK(prog.find("match__Hash__1_0_0"));
  CHECK(!prog.find("mkHash__Hash__2_0_0"));
  CHECK(!prog.find("match__Hash__2_0_0"));
  CHECK(run_entry(unit)->value == 1);
}

TEST_CASE("conflicting version demands are rejected with both versions named") {
  Repository repo = load_repository(vltest::samples_dir() / "matrix");
  try {
    compile_unit(repo, "Main");
    FAIL("expected a version inconsistency");
  } catch (const VersionInconsistency& e) {
    std::string msg = e.what();
    CHECK(msg.find("Matrix") != std::string::npos);
    CHECK(msg.find("0.15.0") != std::string::npos);
    CHECK(msg.find("0.16.0") != std::string::npos);
    CHECK(msg.find("join") != std::string::npos);
    CHECK(msg.find("sortVector") != std::string::npos);
    CHECK(!e.core.empty());
  }
}

TEST_CASE("unversion makes the conflicting program compile and run") {
  Repository repo = load_repository(vltest::samples_dir() / "matrix_unversion");
  CompiledUnit unit = compile_unit(repo, "Main");
  SpecializedProgram prog = specialize_entry(unit);
  CHECK(prog.find("join__Matrix__0_15_0"));
  CHECK(prog.find("sortVector__Matrix__0_16_0"));
  STermPtr v = run_entry(unit);
  REQUIRE(v->kind == STerm::Kind::Int);
  CHECK(v->value == 4);  // vhead [3,1,2,5] + vhead [1,3]
}

TEST_CASE("empty universe programs compile without solving") {
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / "vl_trivial";
  fs::remove_all(root);
  fs::create_directories(root / "Main" / "1.0.0");
  std::ofstream(root / "Main" / "1.0.0" / "Main.vl") << "module Main where\nmain = 42\n";
  Repository repo = load_repository(root);
  CompiledUnit unit = compile_unit(repo, "Main");
  CHECK(unit.universe.empty());
  CHECK(run_entry(unit)->value == 42);
}

TEST_CASE("compilation is deterministic") {
  Repository repo = load_repository(vltest::samples_dir() / "hashapp");
  CompiledUnit a = compile_unit(repo, "App");
  CompiledUnit b = compile_unit(repo, "App");
  REQUIRE(a.solution.size() == b.solution.size());
  for (const auto& [var, label] : a.solution) CHECK(b.solution.at(var) == label);
  CHECK(emit_constraints(a) == emit_constraints(b));
  CHECK(specialized_source(specialize_entry(a), "App") ==
        specialized_source(specialize_entry(b), "App"));
}

TEST_CASE("emit modes produce the documented formats") {
  Repository repo = load_repository(vltest::samples_dir() / "hashapp");
  CompiledUnit unit = compile_unit(repo, "App");

  std::string cons = emit_constraints(unit);
  CHECK(cons.find("-- Hash 1.0.0 mkHash") != std::string::npos);
  CHECK(cons.find("⪯") != std::string::npos);  // dependency lines
  CHECK(cons.find("∼") != std::string::npos);  // type equations

  std::string smt = emit_smt2(unit);
  CHECK(smt.find("(set-logic QF_LIA)") != std::string::npos);
  CHECK(smt.find("(check-sat)") != std::string::npos);

  std::string ifaces = emit_interfaces(unit);
  CHECK(ifaces.find("-- bundled Hash") != std::string::npos);
  CHECK(ifaces.find("mkHash : ") != std::string::npos);
}

TEST_CASE("repositories can span multiple roots") {
  namespace fs = std::filesystem;
  fs::path a = fs::temp_directory_path() / "vl_root_a";
  fs::path b = fs::temp_directory_path() / "vl_root_b";
  fs::remove_all(a);
  fs::remove_all(b);
  fs::create_directories(a / "Lib" / "1.0.0");
  fs::create_directories(b / "Main" / "1.0.0");
  std::ofstream(a / "Lib" / "1.0.0" / "Lib.vl") << "module Lib where\nten = 10\n";
  std::ofstream(b / "Main" / "1.0.0" / "Main.vl")
      << "module Main where\nimport Lib\nmain = ten + 5\n";
  Repository repo = load_repositories({a, b});
  CompiledUnit unit = compile_unit(repo, "Main");
  CHECK(run_entry(unit)->value == 15);
}

TEST_CASE("entry versions can be selected explicitly") {
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / "vl_two_entry";
  fs::remove_all(root);
  fs::create_directories(root / "Main" / "1.0.0");
  fs::create_directories(root / "Main" / "2.0.0");
  std::ofstream(root / "Main" / "1.0.0" / "Main.vl") << "module Main where\nmain = 1\n";
  std::ofstream(root / "Main" / "2.0.0" / "Main.vl") << "module Main where\nmain = 2\n";
  Repository repo = load_repository(root);
  CHECK(run_entry(compile_unit(repo, "Main"))->value == 2);  // defaults to newest
  CHECK(run_entry(compile_unit(repo, "Main", VersionString("1.0.0")))->value == 1);
}

TEST_CASE("bench workloads compile, solve, and report") {
  namespace fs = std::filesystem;
  fs::path scratch = fs::temp_directory_path() / "vl_bench_test";
  fs::remove_all(scratch);
  BenchRow row = bench_config(scratch, 2, 2, 2);
  CHECK(row.mods == 2);
  CHECK(row.vers == 2);
  CHECK(row.mean_ms >= 0.0);

  // The generated workload also runs end to end.
  Repository repo = load_repository(scratch / "bench_2_2");
  CompiledUnit unit = compile_unit(repo, "Main");
  STermPtr v = run_entry(unit);
  CHECK(v->kind == STerm::Kind::Int);
}

TEST_CASE("an empty module checks successfully") {
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / "vl_empty_mod";
  fs::remove_all(root);
  fs::create_directories(root / "Main" / "1.0.0");
  std::ofstream(root / "Main" / "1.0.0" / "Main.vl") << "module Main where\n";
  Repository repo = load_repository(root);
  CompiledUnit unit = compile_unit(repo, "Main");  // no defs, nothing to solve
  CHECK(unit.records.empty());
  CHECK_THROWS_AS(specialize_entry(unit), MissingDefinition);  // but no main to run
}
