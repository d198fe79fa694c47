#pragma once

// Embedding of types, heaps and environments into formulas; CNF; TInst.

#include <string>
#include <vector>

#include "dimp/env.hpp"
#include "dimp/syntax.hpp"

namespace dimp {

// ⟨T⟩(w). Existential binders become fresh dummy names whose own
// constraints are conjoined, mirroring the heap treatment.
Form embed_type(const Ty& t, const Walk& w);

// ⟨ĥ⟩: dummy x:Top bindings for every binder first, then ⟨Tᵢ⟩(xᵢ).
struct HeapEmbedding {
  std::vector<Name> dummies;
  std::vector<Form> formulas;
  std::string str() const;
};
HeapEmbedding embed_heap(const HeapType& h);
// ⟨W⟩ for W = (x:T, Σ̂): x is a dummy too, followed by ⟨T⟩(x).
HeapEmbedding embed_world(const World& w);

// ⟨Γ⟩
std::vector<Form> embed_env(const TypeEnv& env);

// One CNF clause (∧ hyps) ⇒ (∨ goals); every element is an atom. An empty
// goal set is represented by the single goal `false`.
struct Clause {
  std::vector<Form> hyps;
  std::vector<Form> goals;
};

inline constexpr std::size_t kCnfLiteralLimit = 10000;

bool is_atom(const Form& p);
// Throws an Unsupported error when the result would exceed kCnfLiteralLimit.
std::vector<Clause> cnf(const Form& p);
Form clause_formula(const Clause& c);

// TInst: replaces w::A by ⟨T⟩(w) for refinement T; other atoms untouched.
Form tinst(const Form& p, const Name& a, const Ty& t);
Ty tinst(const Ty& s, const Name& a, const Ty& t);
World tinst(const World& w, const Name& a, const Ty& t);
HeapType tinst(const HeapType& h, const Name& a, const Ty& t);

}  // namespace dimp
