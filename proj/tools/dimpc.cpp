#include <CLI11.hpp>
#include <iostream>

#include "dimp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dimpc: type checker for D_imp and DJS programs"};
  dimp::CliConfig cfg;
  std::string file;
  std::vector<std::string> features;
  app.add_option("file", file, "input .dimp or .djs file")->required();
  app.add_option("--prelude", cfg.preludes, "prelude declaration file (repeatable)");
  app.add_option("--solver", cfg.solver, "internal | external:<path>");
  app.add_option("--solver-timeout-ms", cfg.solver_timeout_ms, "per-obligation timeout of the external solver");
  app.add_flag("--emit-dimp", cfg.emit_dimp, "print the desugared D_imp program");
  app.add_flag("--emit-obligations", cfg.emit_obligations, "print every oracle obligation with its verdict");
  app.add_flag("--json", cfg.json, "machine-readable diagnostics");
  app.add_option("--feature", features, "exists-loc | weak-poly-syntax")
      ->check(CLI::IsMember({"exists-loc", "weak-poly-syntax"}));
  app.add_flag("--sequential", [&](std::int64_t) { cfg.parallel = false; }, "check definitions one at a time");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  for (auto& f : features) {
    if (f == "exists-loc") cfg.exists_loc = true;
    if (f == "weak-poly-syntax") cfg.weak_poly_syntax = true;
  }
  try {
    return dimp::check_file(file, cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "dimpc: " << e.what() << "\n";
    return 1;
  }
}
