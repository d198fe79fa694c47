#pragma once

// Well-formedness judgements. Each throws a Wf error with a judgement trace.

#include "dimp/env.hpp"
#include "dimp/syntax.hpp"

namespace dimp {

void wf_walk(const TypeEnv& env, const Walk& w);
void wf_formula(const TypeEnv& env, const Form& p);
void wf_location(const TypeEnv& env, const Location& m);
void wf_typeterm(const TypeEnv& env, const Term& u);
void wf_type(const TypeEnv& env, const Ty& t);
void wf_world(const TypeEnv& env, const World& w);
void wf_heap(const TypeEnv& env, const HeapType& h);

// Γ extended with every binder of the world as x:Top.
TypeEnv bind_world_binders(const TypeEnv& env, const World& w);
// Γ extended with the arrow's quantified variables.
TypeEnv bind_quantifiers(const TypeEnv& env, const UArrow& a);

}  // namespace dimp
