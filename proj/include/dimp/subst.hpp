#pragma once

// Capture-avoiding substitution, free variables and alpha-canonical forms.

#include <map>
#include <set>
#include <string>

#include "dimp/syntax.hpp"

namespace dimp {

// Simultaneous substitution π. Value variables map to terms, locations to
// locations, and type/heap variables may be renamed. Binders shadow entries.
struct Subst {
  std::map<Name, Walk> terms;
  std::map<Location, Location> locs;
  std::map<Name, Name> tyvars;
  std::map<Name, Name> heapvars;

  bool empty() const { return terms.empty() && locs.empty() && tyvars.empty() && heapvars.empty(); }

  // π[w/x]: extends (or overrides) the mapping for x.
  Subst with(const Name& x, Walk w) const;
  Subst with_loc(const Location& from, const Location& to) const;
};

// `compose(outer, inner)` behaves like applying `inner` first, then `outer`.
Subst compose(const Subst& outer, const Subst& inner);

Walk substitute(const Subst& s, const Walk& w);
Form substitute(const Subst& s, const Form& p);
Term substitute(const Subst& s, const Term& u);
Ty substitute(const Subst& s, const Ty& t);
World substitute(const Subst& s, const World& w);
// The heap's own binders are treated as bound (they shadow π).
HeapType substitute(const Subst& s, const HeapType& h);
HeapEnv substitute(const Subst& s, const HeapEnv& h);

// Renames heap binders in place without treating them as bound, so the
// renaming reaches both the binder positions and every use.
HeapType rename_binders(const HeapType& h, const std::map<Name, Name>& renaming);
World rename_binders(const World& w, const std::map<Name, Name>& renaming);

std::set<Name> free_vars(const Walk& w);
std::set<Name> free_vars(const Form& p);
std::set<Name> free_vars(const Ty& t);
std::set<Name> free_vars(const Term& u);
std::set<Name> free_vars(const World& w);
std::set<Name> free_vars(const HeapType& h);
void free_vars_into(const Walk& w, std::set<Name>& out);
void free_vars_into(const Form& p, std::set<Name>& out);
void free_vars_into(const Ty& t, std::set<Name>& out);

// Locations occurring free (not bound by an arrow or ∃ℓ).
std::set<Location> free_locs(const Ty& t);
std::set<Location> free_locs(const HeapType& h);

// Type variables and heap variables occurring free.
std::set<Name> free_tyvars(const Form& p);
std::set<Name> free_heapvars(const Form& p);

// A printable canonical form where every bound name is replaced by a
// positional name, so alpha-equivalent terms print identically.
std::string canonical(const Term& u);
std::string canonical(const Ty& t);
std::string canonical(const World& w);
bool alpha_equal(const Term& a, const Term& b);
bool alpha_equal(const Ty& a, const Ty& b);

}  // namespace dimp
