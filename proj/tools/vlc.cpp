// vlc: compiler and interpreter driver.
//
//   vlc check Main --module-path repo/        type- and version-check
//   vlc run Main --module-path repo/          compile and interpret main
//   vlc build Main --module-path repo/ --out build/
//   vlc core-eval term.lvl --trace            small-step core evaluation
//   vlc bench --mods 4 --vers 4 --reps 10     constraint-solving benchmark

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vl/core_parse.hpp"
#include "vl/driver.hpp"

namespace {

vl::Repository load(const std::vector<std::string>& paths) {
  std::vector<std::filesystem::path> roots(paths.begin(), paths.end());
  if (roots.empty()) roots.push_back(".");
  return vl::load_repositories(roots);
}

void write_or_print(const std::string& text, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_file);
  out << text;
}

int emit_requested(const vl::CompiledUnit& unit, const std::string& emit,
                   const std::string& out_file) {
  if (emit == "constraints")
    write_or_print(vl::emit_constraints(unit), out_file);
  else if (emit == "interface")
    write_or_print(vl::emit_interfaces(unit), out_file);
  else if (emit == "smt2")
    write_or_print(vl::emit_smt2(unit), out_file);
  else {
    std::cerr << "unknown emit mode: " << emit << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vlc: a compiler for programming with versions"};
  app.require_subcommand(1);

  std::vector<std::string> module_paths;
  std::string entry, emit, out_file, core_file;
  std::string entry_version;
  long fuel = 1000000;
  bool trace = false;
  int mods = 4, vers = 4, reps = 10;
  unsigned seed = 0;

  auto* check = app.add_subcommand("check", "type- and version-check an entry module");
  check->add_option("entry", entry)->required();
  check->add_option("--module-path", module_paths);
  check->add_option("--entry-version", entry_version);
  check->add_option("--emit", emit);
  check->add_option("--out", out_file);

  auto* run = app.add_subcommand("run", "compile and interpret the entry's main");
  run->add_option("entry", entry)->required();
  run->add_option("--module-path", module_paths);
  run->add_option("--entry-version", entry_version);
  run->add_option("--fuel", fuel);

  auto* build = app.add_subcommand("build", "write the specialized program");
  build->add_option("entry", entry)->required();
  build->add_option("--module-path", module_paths);
  build->add_option("--entry-version", entry_version);
  build->add_option("--out", out_file)->required();

  auto* core = app.add_subcommand("core-eval", "evaluate a core term step by step");
  core->add_option("file", core_file)->required();
  core->add_option("--fuel", fuel);
  core->add_flag("--trace", trace);

  auto* bench = app.add_subcommand("bench", "constraint-solving scaling benchmark");
  bench->add_option("--mods", mods);
  bench->add_option("--vers", vers);
  bench->add_option("--reps", reps);
  bench->add_option("--seed", seed);
  bench->add_option("--out", out_file);

  CLI11_PARSE(app, argc, argv);

  try {
    auto version_opt = entry_version.empty() ? std::nullopt
                                             : std::optional<vl::VersionString>(entry_version);
    if (check->parsed()) {
      vl::CompiledUnit unit = vl::compile_unit(load(module_paths), entry, version_opt);
      if (!emit.empty()) return emit_requested(unit, emit, out_file);
      std::cout << "ok: " << entry << " " << unit.entry_version;
      if (!unit.solution.empty()) {
        std::cout << "; versions resolved:";
        std::set<std::string> shown;
        for (const auto& [var, label] : unit.solution)
          if (shown.insert(label.to_string()).second) std::cout << " " << label.to_string();
      }
      std::cout << "\n";
      return 0;
    }
    if (run->parsed()) {
      vl::CompiledUnit unit = vl::compile_unit(load(module_paths), entry, version_opt);
      vl::STermPtr value = vl::run_entry(unit, "main", fuel);
      std::cout << vl::value_string(value) << "\n";
      return 0;
    }
    if (build->parsed()) {
      vl::CompiledUnit unit = vl::compile_unit(load(module_paths), entry, version_opt);
      vl::SpecializedProgram prog = vl::specialize_entry(unit);
      std::filesystem::create_directories(out_file);
      std::filesystem::path target = std::filesystem::path(out_file) / (entry + ".vl");
      std::ofstream os(target);
      os << vl::specialized_source(prog, entry);
      std::cout << "wrote " << target.string() << "\n";
      return 0;
    }
    if (core->parsed()) {
      std::ifstream in(core_file);
      if (!in) {
        std::cerr << "cannot read " << core_file << "\n";
        return 2;
      }
      std::stringstream buf;
      buf << in.rdbuf();
      vl::LTermPtr term = vl::parse_core_term(buf.str());
      vl::EvalResult r = vl::eval(term, static_cast<int>(fuel), vl::newest_label_choice, true);
      (void)trace;  // the trace is the point of this command
      std::cout << "     " << vl::lterm_string(term) << "\n";
      for (const auto& [rule, t] : r.trace)
        std::cout << "~> [" << rule << "] " << vl::lterm_string(t) << "\n";
      switch (r.status) {
        case vl::EvalStatus::Value:
          std::cout << vl::lterm_string(r.term) << "\n";
          return 0;
        case vl::EvalStatus::Stuck:
          std::cout << "stuck: " << vl::lterm_string(r.term) << "\n";
          return 1;
        case vl::EvalStatus::OutOfFuel:
          std::cerr << "fuel exhausted at: " << vl::lterm_string(r.term) << "\n";
          return 1;
      }
      return 0;
    }
    if (bench->parsed()) {
      std::filesystem::path scratch =
          std::filesystem::temp_directory_path() / ("vlc_bench_" + std::to_string(seed));
      std::string csv = vl::bench_csv(scratch, mods, vers, reps, seed);
      write_or_print(csv, out_file);
      return 0;
    }
  } catch (const vl::SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return 2;
  } catch (const vl::MissingModuleVersion& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vl::DuplicateDefinition& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vl::VersionInconsistency& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const vl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
