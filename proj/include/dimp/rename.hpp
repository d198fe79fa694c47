#pragma once

// Global renaming: makes every let and lambda binder distinct from every
// other binder and from the program's global names.

#include <set>

#include "dimp/program.hpp"
#include "dimp/syntax.hpp"

namespace dimp {

// `used` holds names already taken; it grows with every binder kept or
// minted.
Exp rename_binders(const Exp& e, std::set<Name>& used);
Program rename_program(const Program& p);

}  // namespace dimp
