#pragma once

// The DJS surface language and its desugaring to D_imp.

#include <string_view>

#include "dimp/parser.hpp"
#include "dimp/program.hpp"

namespace dimp {

// Parses a DJS compilation unit and desugars it into D_imp declarations.
Program desugar_program(std::string_view source, ParseOptions opts = {});

}  // namespace dimp
