#pragma once

// The dimpc driver: parse, desugar, rename, check and report.

#include <iosfwd>
#include <string>
#include <vector>

namespace dimp {

struct CliConfig {
  std::vector<std::string> preludes;
  std::string solver = "internal";
  int solver_timeout_ms = 2000;
  bool emit_dimp = false;
  bool emit_obligations = false;
  bool json = false;
  bool exists_loc = false;
  bool weak_poly_syntax = false;
  bool parallel = true;
};

// Default prelude used for .djs inputs when none is given.
std::string default_prelude_path();

// Checks one file and writes diagnostics to `out`; returns the exit code.
int check_file(const std::string& path, const CliConfig& config, std::ostream& out, std::ostream& err);

}  // namespace dimp
