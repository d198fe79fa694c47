#pragma once

// Implication, subtyping, syntactic subtyping of type terms, world subtyping
// and heap matching.

#include <memory>

#include "dimp/env.hpp"
#include "dimp/solver.hpp"
#include "dimp/subst.hpp"
#include "dimp/syntax.hpp"

namespace dimp {

class Prover {
 public:
  static constexpr int kFuel = 64;

  explicit Prover(std::shared_ptr<Oracle> oracle) : oracle_(std::move(oracle)) {}

  Oracle& oracle() { return *oracle_; }

  // Valid(⟨Γ⟩ ⇒ p), no decomposition.
  OracleResult valid(const TypeEnv& env, const Form& p);

  // I-Valid, then I-Cnf with I-HasTyp for has-type goals.
  void impl_formula(const TypeEnv& env, const Form& p);
  void sub_type(const TypeEnv& env, const Ty& t1, const Ty& t2);
  void syn_sub(const TypeEnv& env, const Term& u1, const Term& u2);
  // Returns π from W2's binders to W1's.
  Subst sub_world(const TypeEnv& env, const World& w1, const World& w2);

 private:
  bool prove_atom(const TypeEnv& env, const Form& q, std::vector<std::string>& notes);

  std::shared_ptr<Oracle> oracle_;
  int depth_ = 0;
  bool saw_unknown_ = false;
};

// Heap matching: pairs bindings by location and maps ĥ2's binders to ĥ1's.
Subst match_heaps(const HeapType& h1, const HeapType& h2);

// Splits a prenex ∃ℓ̄ prefix off a type.
std::pair<std::vector<Location>, Ty> split_exists_locs(const Ty& t);

// Γ extended with x:T for the world's value binder and ℓ ↦ y:S binders.
TypeEnv bind_world(const TypeEnv& env, const World& w);

// Renames any binder of `w` that is already bound in Γ to a fresh name.
World avoid_env(const TypeEnv& env, const World& w);

}  // namespace dimp
