#pragma once

// Value typing, expression typing, Join and HeapEnv.

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "dimp/env.hpp"
#include "dimp/subtype.hpp"
#include "dimp/syntax.hpp"

namespace dimp {

struct CheckOptions {
  bool exists_loc = false;
};

// Γ; Σ; Ω ⊢ e : T; Σ′ with T in prenex form.
struct TypedResult {
  Ty type;
  HeapEnv heap;
};

// HeapEnv(Σ̂) = (x̄:S̄, Σ). `renaming` maps each original binder to its
// fresh variable.
struct HeapEnvResult {
  std::vector<std::pair<Name, Ty>> binds;
  HeapEnv env;
  Subst renaming;
};
HeapEnvResult heap_env(const HeapType& h);
// Drops binders whose type is a singleton {y | y = w} with w free of heap
// binders, storing w in the heap directly.
void inline_singletons(HeapEnvResult& he);

// Maps Σ̂'s binders to the values stored in Σ.
Subst match_heap_env(const HeapEnv& env, const HeapType& h);

// ty(c)
Ty ty_const(const Constant& c);

// Lifts nested existentials so ∃ℓ̄ come first, then value ∃, then a
// refinement.
Ty prenex(const Ty& t);
bool is_prenex(const Ty& t);

// JoinTypes(b, S1, S2)
Ty join_types(const Walk& b, const Ty& s1, const Ty& s2);

class Checker {
 public:
  Checker(std::shared_ptr<Oracle> oracle, CheckOptions opts = {})
      : prover_(std::move(oracle)), opts_(opts) {}

  Prover& prover() { return prover_; }

  Ty type_value(const TypeEnv& env, const HeapEnv& heap, const Val& v);
  Subst world_sat(const TypeEnv& env, const Ty& t, const HeapEnv& heap, const World& w);
  TypedResult type_expr(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const Exp& e);
  TypedResult join(const Walk& b, const TypedResult& r1, const TypedResult& r2);

  // T-Fun against one arrow.
  Ty check_fun(const TypeEnv& env, const LabelEnv& labels, const Val& lambda, const Term& arrow);
  // e as T; a lambda subject is checked by T-Fun against every arrow of T.
  TypedResult type_as(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const Exp& e,
                      const Ty& t, bool keep_heap);

  // StaticLoc for run-time locations.
  std::map<Location, Location> static_locs;

 private:
  TypedResult dispatch(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const Exp& e);
  TypedResult type_let(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const ELet& n);
  TypedResult type_app(const TypeEnv& env, const HeapEnv& heap, const EApp& n);
  TypedResult type_thaw(const TypeEnv& env, const HeapEnv& heap, const EThaw& n);
  TypedResult type_freeze(const TypeEnv& env, const HeapEnv& heap, const EFreeze& n);
  TypedResult type_label(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const ELabel& n);
  TypedResult type_break(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const EBreak& n);

  // First strong location ℓ in Σ with Γ ⊢ v :: Ref ℓ.
  std::optional<Location> find_ref(const TypeEnv& env, const HeapEnv& heap, const Val& v, bool need_proto,
                                   const std::optional<Location>& proto = std::nullopt);
  // Location arguments omitted at a call: each L is matched against the
  // argument's `:: Ref L` atoms, proto links follow from Σ.
  std::vector<Location> infer_locs(const TypeEnv& env, const HeapEnv& heap, const Val& arg, const World& w1,
                                   const std::vector<Location>& vars);
  bool proves(const TypeEnv& env, const Form& p);
  const Val* lambda_of(const Val& v) const;

  Prover prover_;
  CheckOptions opts_;
  std::map<Name, Val> lambdas_;
};

}  // namespace dimp
