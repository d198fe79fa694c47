#pragma once

// Generic S-expression trees: the shared carrier for the D_imp textual
// syntax. `(...)` and `{...}` are both lists; the bracket is remembered.

#include <string>
#include <string_view>
#include <vector>

namespace dimp {

struct SExpr {
  enum class Kind { Atom, String, List };
  Kind kind = Kind::Atom;
  std::string text;  // atom spelling or decoded string contents
  std::vector<SExpr> items;
  char bracket = '(';
  int line = 0;

  static SExpr atom(std::string s) { return {Kind::Atom, std::move(s), {}, '(', 0}; }
  static SExpr string(std::string s) { return {Kind::String, std::move(s), {}, '(', 0}; }
  static SExpr list(std::vector<SExpr> items, char bracket = '(') {
    return {Kind::List, {}, std::move(items), bracket, 0};
  }

  bool is_atom() const { return kind == Kind::Atom; }
  bool is_atom(std::string_view s) const { return kind == Kind::Atom && text == s; }
  bool is_list() const { return kind == Kind::List; }
  // True for a parenthesised list whose first element is the atom `head`.
  bool is_form(std::string_view head) const {
    return kind == Kind::List && bracket == '(' && !items.empty() && items[0].is_atom(head);
  }
};

// Reads every top-level datum. Comments run from ';' to end of line.
std::vector<SExpr> read_sexprs(std::string_view text);

// Single-line rendering.
std::string write_flat(const SExpr& e);
// Indented rendering: lists that fit in `width` columns stay on one line.
std::string write_pretty(const SExpr& e, int width = 80);

}  // namespace dimp
