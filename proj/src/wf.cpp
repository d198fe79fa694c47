#include "dimp/wf.hpp"

#include <set>

#include "dimp/error.hpp"
#include "dimp/printer.hpp"

namespace dimp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(const std::string& msg) { fail(ErrorKind::Wf, msg); }

}  // namespace

TypeEnv bind_world_binders(const TypeEnv& env, const World& w) {
  TypeEnv out = env;
  for (auto& [x, _] : binders(w)) out = out.bind(x, mk::top());
  return out;
}

TypeEnv bind_quantifiers(const TypeEnv& env, const UArrow& a) {
  TypeEnv out = env;
  for (auto& t : a.tyvars) out = out.tyvar(t);
  for (auto& l : a.locvars) out = out.locvar(l);
  for (auto& h : a.heapvars) out = out.heapvar(h);
  return out;
}

void wf_walk(const TypeEnv& env, const Walk& w) {
  std::visit(overloaded{
                 [&](const WVar& n) {
                   if (!env.lookup(n.name)) bad("unbound variable " + n.name.str());
                 },
                 [](const WConst&) {},
                 [&](const WLoc& n) { wf_location(env, n.loc); },
                 [&](const WExtend& n) {
                   wf_walk(env, n.dict);
                   wf_walk(env, n.key);
                   wf_walk(env, n.val);
                 },
                 [&](const WTuple& n) {
                   for (auto& i : n.items) wf_walk(env, i);
                 },
                 [](const WFun&) {},
                 [&](const WApp& n) {
                   for (auto& a : n.args) wf_walk(env, a);
                 },
             },
             w->node);
}

void wf_formula(const TypeEnv& env, const Form& p) {
  std::visit(overloaded{
                 [](const FTrue&) {},
                 [](const FFalse&) {},
                 [&](const FEq& n) {
                   wf_walk(env, n.lhs);
                   wf_walk(env, n.rhs);
                 },
                 [&](const FPred& n) {
                   for (auto& a : n.args) wf_walk(env, a);
                 },
                 [&](const FHasTyp& n) {
                   in_rule("WF-HasTyp", [&] {
                     wf_walk(env, n.term);
                     wf_typeterm(env, n.type);
                   });
                 },
                 [&](const FHeapHas& n) {
                   in_rule("WF-HeapHas", [&] {
                     if (!env.has_heapvar(n.heap)) bad("unbound heap variable " + n.heap.str());
                     wf_location(env, n.loc);
                     wf_walk(env, n.term);
                   });
                 },
                 [&](const FAnd& n) {
                   for (auto& i : n.items) wf_formula(env, i);
                 },
                 [&](const FOr& n) {
                   for (auto& i : n.items) wf_formula(env, i);
                 },
                 [&](const FNot& n) { wf_formula(env, n.body); },
                 [&](const FImplies& n) {
                   wf_formula(env, n.lhs);
                   wf_formula(env, n.rhs);
                 },
                 [&](const FIte& n) {
                   wf_formula(env, n.cond);
                   wf_formula(env, n.then_f);
                   wf_formula(env, n.else_f);
                 },
             },
             p->node);
}

void wf_location(const TypeEnv& env, const Location& m) {
  if (m.is_var() && !env.has_locvar(m)) bad("unbound location variable " + m.str());
}

void wf_typeterm(const TypeEnv& env, const Term& u) {
  std::visit(overloaded{
                 [&](const UArrow& a) {
                   in_rule("WF-Arrow", [&] {
                     TypeEnv g1 = bind_quantifiers(env, a);
                     in_rule("input", [&] { wf_world(g1, a.input); });
                     TypeEnv g2 = in_rule("input", [&] { return bind_world_binders(g1, a.input); });
                     in_rule("output", [&] { wf_world(g2, a.output); });
                   });
                 },
                 [&](const UTyVar& n) {
                   if (!env.has_tyvar(n.name)) bad("unbound type variable " + n.name.str());
                 },
                 [&](const UArray& n) { in_rule("WF-Array", [&] { wf_type(env, n.elem); }); },
                 [&](const URef& n) { in_rule("WF-Ref", [&] { wf_location(env, n.loc); }); },
                 [](const UNull&) {},
             },
             u->node);
}

void wf_type(const TypeEnv& env, const Ty& t) {
  std::visit(overloaded{
                 [&](const TRefine& n) {
                   in_rule("WF-Refine", [&] { wf_formula(env.bind(n.binder, mk::top()), n.pred); });
                 },
                 [&](const TExists& n) {
                   in_rule("WF-Exists", [&] {
                     wf_type(env, n.bound);
                     wf_type(env.bind(n.binder, mk::top()), n.body);
                   });
                 },
                 [&](const TExistsLoc& n) {
                   in_rule("WF-ExistsLoc", [&] {
                     wf_type(n.loc.is_var() ? env.locvar(n.loc) : env, n.body);
                   });
                 },
             },
             t->node);
}

void wf_world(const TypeEnv& env, const World& w) {
  in_rule("WF-World", [&] {
    // ∃ℓ in the value type scopes over the heap as well.
    TypeEnv g = env;
    const Type* t = w.type.get();
    while (auto* el = std::get_if<TExistsLoc>(&t->node)) {
      if (el->loc.is_var()) g = g.locvar(el->loc);
      t = el->body.get();
    }
    wf_type(env, w.type);
    for (auto& b : w.heap.bindings) {
      if (auto* hb = std::get_if<HBind>(&b); hb && hb->binder == w.binder) {
        bad("heap binder " + hb->binder.str() + " shadows the world binder");
      }
    }
    wf_heap(g.bind(w.binder, mk::top()), w.heap);
  });
}

void wf_heap(const TypeEnv& env, const HeapType& h) {
  in_rule("WF-Heap", [&] {
    if (!env.has_heapvar(h.deep)) bad("unbound heap variable " + h.deep.str());
    std::set<Location> seen;
    std::set<Name> names;
    TypeEnv g = env;
    for (auto& b : h.bindings) {
      const Location& l = binding_loc(b);
      if (!seen.insert(l).second) bad("duplicate location " + l.str() + " in heap");
      if (auto* hb = std::get_if<HBind>(&b)) {
        if (!names.insert(hb->binder).second) bad("duplicate heap binder " + hb->binder.str());
        g = g.bind(hb->binder, mk::top());
      }
    }
    for (auto& b : h.bindings) {
      std::visit(overloaded{
                     [&](const HBind& n) {
                       in_rule("WF-Bind", [&] {
                         wf_location(env, n.loc);
                         if (n.proto) wf_location(env, *n.proto);
                         wf_type(g, n.type);
                       });
                     },
                     [&](const HWeak& n) {
                       in_rule("WF-Weak", [&] {
                         wf_location(env, n.loc);
                         if (n.state.thawed) wf_location(env, *n.state.thawed);
                       });
                     },
                 },
                 b);
    }
  });
}

}  // namespace dimp
