#pragma once

// Checks a whole program: declarations extend Γ and the initial heap in
// order, and each definition is checked against its declared type.

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "dimp/checker.hpp"
#include "dimp/error.hpp"
#include "dimp/program.hpp"
#include "dimp/solver.hpp"

namespace dimp {

struct DriverOptions {
  CheckOptions check;
  SolverConfig solver;
  bool record_obligations = false;
  bool parallel = true;
  // StaticLoc for run-time locations appearing in machine states.
  std::map<Location, Location> static_locs;
};

struct DefResult {
  Name name;
  int line = 0;
  std::optional<Error> error;
  std::vector<RecordingOracle::Entry> obligations;
};

struct ProgramResult {
  std::vector<DefResult> defs;
  // A failing non-definition declaration stops checking.
  std::optional<Error> decl_error;

  bool ok() const;
  // 0, or the code of the first failure in source order.
  int exit_code() const;
};

int exit_code(const Error& e);

ProgramResult check_program(const Program& p, const DriverOptions& opts);

}  // namespace dimp
