#pragma once

// Parser for the textual D_imp syntax (see docs/syntax.md).

#include <string_view>

#include "dimp/program.hpp"
#include "dimp/sexpr.hpp"
#include "dimp/syntax.hpp"

namespace dimp {

struct ParseOptions {
  bool exists_loc = false;      // ∃ℓ.T types
  bool weak_poly = false;       // weak location variables and Ψ in arrows
  bool runtime_locs = false;    // #r locations (machine states only)
};

class Parser {
 public:
  explicit Parser(ParseOptions opts = {}) : opts_(opts) {}

  Walk walk(const SExpr& s) const;
  Form formula(const SExpr& s) const;
  Term term(const SExpr& s) const;
  Ty type(const SExpr& s) const;
  World world(const SExpr& s) const;
  HeapType heap(const SExpr& s) const;
  HeapEnv heap_env(const SExpr& s) const;
  Location location(const SExpr& s) const;
  ThawState thaw_state(const SExpr& s) const;
  Val value(const SExpr& s) const;
  Exp expr(const SExpr& s) const;
  Decl decl(const SExpr& s) const;
  Program program(std::string_view text) const;

 private:
  Name name(const SExpr& s) const;
  Name label_name(const SExpr& s) const;
  ParseOptions opts_;
};

// Single-datum conveniences; throw a Parse error unless `text` holds exactly
// one datum.
SExpr read_one(std::string_view text);
Walk parse_walk(std::string_view text, ParseOptions opts = {});
Form parse_formula(std::string_view text, ParseOptions opts = {});
Term parse_term(std::string_view text, ParseOptions opts = {});
Ty parse_type(std::string_view text, ParseOptions opts = {});
World parse_world(std::string_view text, ParseOptions opts = {});
HeapType parse_heap(std::string_view text, ParseOptions opts = {});
Exp parse_expr(std::string_view text, ParseOptions opts = {});
Program parse_program(std::string_view text, ParseOptions opts = {});

}  // namespace dimp
