#pragma once

// Renders syntax in the textual D_imp form accepted by parser.hpp.

#include <string>

#include "dimp/program.hpp"
#include "dimp/sexpr.hpp"
#include "dimp/syntax.hpp"

namespace dimp {

SExpr to_sexpr(const Walk& w);
SExpr to_sexpr(const Form& p);
SExpr to_sexpr(const Term& u);
SExpr to_sexpr(const Ty& t);
SExpr to_sexpr(const World& w);
SExpr to_sexpr(const HeapType& h);
SExpr to_sexpr(const HeapEnv& h);
SExpr to_sexpr(const Val& v);
SExpr to_sexpr(const Exp& e);
SExpr to_sexpr(const Decl& d);

std::string to_string(const Walk& w);
std::string to_string(const Form& p);
std::string to_string(const Term& u);
std::string to_string(const Ty& t);
std::string to_string(const World& w);
std::string to_string(const HeapType& h);
std::string to_string(const HeapEnv& h);
std::string to_string(const Val& v);
std::string to_string(const Exp& e);
// Multi-line layout for expressions and whole programs.
std::string to_pretty(const Exp& e, int width = 80);
std::string to_pretty(const Program& p, int width = 80);

}  // namespace dimp
