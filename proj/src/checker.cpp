#include "dimp/checker.hpp"

#include <set>

#include "dimp/error.hpp"
#include "dimp/logic.hpp"
#include "dimp/printer.hpp"
#include "dimp/wf.hpp"

namespace dimp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void type_error(const std::string& msg) { fail(ErrorKind::Type, msg); }

// A prenex type taken apart.
struct Prefix {
  std::vector<Location> locs;
  std::vector<std::pair<Name, Ty>> binds;
  Ty body;
};

Prefix split(const Ty& t) {
  Prefix p;
  Ty cur = t;
  while (true) {
    if (auto* el = std::get_if<TExistsLoc>(&cur->node)) {
      p.locs.push_back(el->loc);
      cur = el->body;
    } else if (auto* ex = std::get_if<TExists>(&cur->node)) {
      p.binds.emplace_back(ex->binder, ex->bound);
      cur = ex->body;
    } else {
      break;
    }
  }
  p.body = cur;
  return p;
}

Ty rebuild(const std::vector<Location>& locs, const std::vector<std::pair<Name, Ty>>& binds, Ty body) {
  for (auto it = binds.rbegin(); it != binds.rend(); ++it) body = mk::exists(it->first, it->second, body);
  for (auto it = locs.rbegin(); it != locs.rend(); ++it) body = mk::exists_loc(*it, body);
  return body;
}

Form typed_pred(const std::string& p, const Walk& w) { return mk::pred(p, {w}); }

Ty self_type(const Walk& w, std::vector<Form> extra = {}) {
  Ty s = mk::singleton(w);
  const auto& r = std::get<TRefine>(s->node);
  std::vector<Form> items{r.pred};
  for (auto& f : extra) items.push_back(substitute(Subst{}.with(Name("%self"), mk::var(r.binder)), f));
  return mk::refine(r.binder, mk::conj(items));
}

Walk self() { return mk::var(Name("%self")); }

// Γ with a prenex type's binders opened; the heap follows any renaming.
struct Opened {
  TypeEnv env;
  Ty body;
  HeapEnv heap;
  std::vector<Location> locs;
  std::vector<std::pair<Name, Ty>> binds;
};

Opened open_type(const TypeEnv& env, const Ty& t, const HeapEnv& heap) {
  Opened o{env, t, heap, {}, {}};
  Prefix p = split(prenex(t));
  Subst ren;
  for (auto& l : p.locs) {
    if (l.is_var() && !o.env.has_locvar(l)) o.env = o.env.locvar(l);
    o.locs.push_back(l);
  }
  for (auto& [x, bound] : p.binds) {
    Ty b = substitute(ren, bound);
    Name y = x;
    if (o.env.lookup(x)) {
      y = Name::fresh(x.base);
      ren.terms[x] = mk::var(y);
    }
    o.env = o.env.bind(y, b);
    o.binds.emplace_back(y, b);
  }
  o.body = substitute(ren, p.body);
  if (!ren.empty()) o.heap = substitute(ren, heap);
  return o;
}

bool same_heap(const HeapEnv& a, const HeapEnv& b) {
  if (a.deep != b.deep || a.bindings.size() != b.bindings.size()) return false;
  std::map<Location, const EnvBinding*> idx;
  for (auto& x : b.bindings) idx[binding_loc(x)] = &x;
  for (auto& x : a.bindings) {
    auto it = idx.find(binding_loc(x));
    if (it == idx.end()) return false;
    const EnvBinding& y = *it->second;
    if (x.index() != y.index()) return false;
    if (auto* e = std::get_if<EBind>(&x)) {
      const auto& f = std::get<EBind>(y);
      if (e->proto != f.proto || to_string(e->value) != to_string(f.value)) return false;
    } else if (!(std::get<HWeak>(x).state == std::get<HWeak>(y).state)) {
      return false;
    }
  }
  return true;
}

const EnvBinding* find_binding(const HeapEnv& h, const Location& l) {
  for (auto& b : h.bindings) {
    if (binding_loc(b) == l) return &b;
  }
  return nullptr;
}

bool has_loc(const HeapEnv& h, const Location& l) { return find_binding(h, l) != nullptr; }

void harvest_refs(const Form& p, const Walk& w, std::vector<Location>& out) {
  std::visit(overloaded{
                 [&](const FHasTyp& n) {
                   if (auto* r = std::get_if<URef>(&n.type->node); r && to_string(n.term) == to_string(w)) {
                     out.push_back(r->loc);
                   }
                 },
                 [&](const FAnd& n) {
                   for (auto& i : n.items) harvest_refs(i, w, out);
                 },
                 [&](const FIte& n) {
                   harvest_refs(n.then_f, w, out);
                   harvest_refs(n.else_f, w, out);
                 },
                 [](const auto&) {},
             },
             p->node);
}

void harvest_ref_atoms(const Form& p, const std::set<Location>& wanted, std::vector<std::pair<Walk, Location>>& out) {
  std::visit(overloaded{
                 [&](const FHasTyp& n) {
                   if (auto* r = std::get_if<URef>(&n.type->node); r && wanted.count(r->loc)) {
                     out.emplace_back(n.term, r->loc);
                   }
                 },
                 [&](const FAnd& n) {
                   for (auto& i : n.items) harvest_ref_atoms(i, wanted, out);
                 },
                 [&](const FOr& n) {
                   for (auto& i : n.items) harvest_ref_atoms(i, wanted, out);
                 },
                 [&](const FImplies& n) { harvest_ref_atoms(n.rhs, wanted, out); },
                 [&](const FIte& n) {
                   harvest_ref_atoms(n.then_f, wanted, out);
                   harvest_ref_atoms(n.else_f, wanted, out);
                 },
                 [](const auto&) {},
             },
             p->node);
}

void harvest_arrows(const Form& p, std::vector<Term>& out) {
  std::visit(overloaded{
                 [&](const FHasTyp& n) {
                   if (std::holds_alternative<UArrow>(n.type->node)) out.push_back(n.type);
                 },
                 [&](const FAnd& n) {
                   for (auto& i : n.items) harvest_arrows(i, out);
                 },
                 [&](const FOr& n) {
                   for (auto& i : n.items) harvest_arrows(i, out);
                 },
                 [&](const FImplies& n) { harvest_arrows(n.rhs, out); },
                 [&](const FIte& n) {
                   harvest_arrows(n.then_f, out);
                   harvest_arrows(n.else_f, out);
                 },
                 [](const auto&) {},
             },
             p->node);
}

// Top-level `ν :: U` conjuncts of a refinement, U an arrow.
std::vector<Term> arrow_conjuncts(const Ty& t) {
  std::vector<Term> out;
  auto* r = std::get_if<TRefine>(&t->node);
  if (!r) return out;
  std::vector<Form> stack{r->pred};
  while (!stack.empty()) {
    Form f = stack.back();
    stack.pop_back();
    if (auto* a = std::get_if<FAnd>(&f->node)) {
      for (auto it = a->items.rbegin(); it != a->items.rend(); ++it) stack.push_back(*it);
    } else if (auto* h = std::get_if<FHasTyp>(&f->node)) {
      auto* v = std::get_if<WVar>(&h->term->node);
      if (v && v->name == r->binder && std::holds_alternative<UArrow>(h->type->node)) out.push_back(h->type);
    }
  }
  return out;
}

HeapType expand(const HeapType& h, const Name& var, const HeapType& inst) {
  if (h.deep != var) return h;
  HeapType out{inst.deep, inst.bindings};
  for (auto& b : h.bindings) out.bindings.push_back(b);
  std::set<Location> seen;
  for (auto& b : out.bindings) {
    if (!seen.insert(binding_loc(b)).second) {
      type_error("heap instantiation produces duplicate location " + binding_loc(b).str());
    }
  }
  return out;
}

HeapType freshen_heap(const HeapType& h) {
  std::map<Name, Name> ren;
  for (auto& [x, _] : binders(h)) ren[x] = Name::fresh(x.base);
  return rename_binders(h, ren);
}

Location skolem(const Location& l) {
  std::string base = l.name.base;
  if (!base.empty()) base[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(base[0])));
  return Location::strong(Name::fresh(base));
}

bool breaks_to(const Val& v, const Name& label);

bool breaks_to(const Exp& e, const Name& label) {
  return std::visit(overloaded{
                        [&](const EVal& n) { return breaks_to(n.value, label); },
                        [&](const ELet& n) { return breaks_to(n.bound, label) || breaks_to(n.body, label); },
                        [&](const EIf& n) { return breaks_to(n.then_e, label) || breaks_to(n.else_e, label); },
                        [&](const EAs& n) { return breaks_to(n.body, label); },
                        [&](const ELabel& n) { return n.label != label && breaks_to(n.body, label); },
                        [&](const EBreak& n) { return n.label == label || breaks_to(n.value, label); },
                        [](const auto&) { return false; },
                    },
                    e->node);
}

bool breaks_to(const Val&, const Name&) { return false; }

// The term w of a singleton {y | y = w}, if t is one.
std::optional<Walk> singleton_term(const Ty& t) {
  auto* r = std::get_if<TRefine>(&t->node);
  if (!r) return std::nullopt;
  auto* e = std::get_if<FEq>(&r->pred->node);
  if (!e) return std::nullopt;
  auto is_binder = [&](const Walk& w) {
    auto* v = std::get_if<WVar>(&w->node);
    return v && v->name == r->binder;
  };
  if (is_binder(e->lhs) && !free_vars(e->rhs).count(r->binder)) return e->rhs;
  if (is_binder(e->rhs) && !free_vars(e->lhs).count(r->binder)) return e->lhs;
  return std::nullopt;
}

}  // namespace

void inline_singletons(HeapEnvResult& he) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<Name> names;
    for (auto& [z, _] : he.binds) names.insert(z);
    for (std::size_t i = 0; i < he.binds.size(); ++i) {
      auto w = singleton_term(he.binds[i].second);
      if (!w) continue;
      auto fv = free_vars(*w);
      if (std::any_of(fv.begin(), fv.end(), [&](const Name& n) { return names.count(n); })) continue;
      Subst s = Subst{}.with(he.binds[i].first, *w);
      he.binds.erase(he.binds.begin() + static_cast<std::ptrdiff_t>(i));
      for (auto& [_, t] : he.binds) t = substitute(s, t);
      he.env = substitute(s, he.env);
      changed = true;
      break;
    }
  }
}

// ---------------------------------------------------------------------------

HeapEnvResult heap_env(const HeapType& h) {
  HeapEnvResult out;
  out.env.deep = h.deep;
  for (auto& [x, _] : binders(h)) out.renaming.terms[x] = mk::var(Name::fresh(x.base));
  for (auto& b : h.bindings) {
    if (auto* hb = std::get_if<HBind>(&b)) {
      const Walk& z = out.renaming.terms.at(hb->binder);
      Name zn = std::get<WVar>(z->node).name;
      // The binders are substituted as free names so the renaming reaches
      // every sibling binding's type.
      Subst s = out.renaming;
      Ty ty = substitute(s, hb->type);
      out.binds.emplace_back(zn, ty);
      out.env.bindings.push_back(EBind{hb->loc, z, hb->proto});
    } else {
      out.env.bindings.push_back(std::get<HWeak>(b));
    }
  }
  return out;
}

Subst match_heap_env(const HeapEnv& env, const HeapType& h) {
  return in_rule("HeapEnv-Match", [&] {
    if (env.deep != h.deep) {
      type_error("deep heap parts differ: " + env.deep.str() + " vs " + h.deep.str());
    }
    auto perm = heap_permutation(env.bindings, h.bindings);
    if (!perm) type_error("heap " + to_string(env) + " does not match " + to_string(h));
    Subst pi;
    for (std::size_t i = 0; i < env.bindings.size(); ++i) {
      const EnvBinding& b1 = env.bindings[i];
      const HeapBinding& b2 = h.bindings[(*perm)[i]];
      auto* e = std::get_if<EBind>(&b1);
      auto* t = std::get_if<HBind>(&b2);
      if (e && t) {
        if (e->proto != t->proto) type_error("prototype links differ at " + e->loc.str());
        pi.terms[t->binder] = e->value;
        continue;
      }
      auto* w1 = std::get_if<HWeak>(&b1);
      auto* w2 = std::get_if<HWeak>(&b2);
      if (w1 && w2) {
        if (!(w1->state == w2->state)) {
          type_error("thaw states differ at " + w1->loc.str() + ": " + w1->state.str() + " vs " +
                     w2->state.str());
        }
        continue;
      }
      type_error("binding kinds differ at " + binding_loc(b1).str());
    }
    return pi;
  });
}

Ty ty_const(const Constant& c) {
  Walk w = mk::konst(c);
  switch (c.kind) {
    case Constant::Kind::Int: return self_type(w, {typed_pred("Int", self())});
    case Constant::Kind::Str: return self_type(w, {typed_pred("Str", self())});
    case Constant::Kind::Bool: return self_type(w, {typed_pred("Bool", self())});
    case Constant::Kind::EmptyDict: return self_type(w, {typed_pred("Dict", self())});
    case Constant::Kind::Null:
    case Constant::Kind::Undefined: return self_type(w);
  }
  return self_type(w);
}

Ty prenex(const Ty& t) {
  return std::visit(
      overloaded{
          [&](const TRefine&) { return t; },
          [&](const TExistsLoc& n) { return mk::exists_loc(n.loc, prenex(n.body)); },
          [&](const TExists& n) {
            Prefix a = split(prenex(n.bound));
            Prefix b = split(prenex(n.body));
            std::set<Name> avoid = free_vars(n.body);
            avoid.insert(n.binder);
            Subst ren;
            std::vector<std::pair<Name, Ty>> binds;
            for (auto& [x, bound] : a.binds) {
              Name y = avoid.count(x) ? Name::fresh(x.base) : x;
              if (y != x) ren.terms[x] = mk::var(y);
              binds.emplace_back(y, substitute(ren, bound));
            }
            binds.emplace_back(n.binder, substitute(ren, a.body));
            for (auto& bb : b.binds) binds.push_back(bb);
            std::vector<Location> locs = a.locs;
            locs.insert(locs.end(), b.locs.begin(), b.locs.end());
            return rebuild(locs, binds, b.body);
          },
      },
      t->node);
}

bool is_prenex(const Ty& t) {
  Prefix p = split(t);
  if (!std::holds_alternative<TRefine>(p.body->node)) return false;
  for (auto& [_, b] : p.binds) {
    if (!std::holds_alternative<TRefine>(b->node)) return false;
  }
  return true;
}

Ty join_types(const Walk& b, const Ty& s1, const Ty& s2) {
  Prefix p1 = split(prenex(s1));
  Prefix p2 = split(prenex(s2));
  Form is_true = mk::eq(b, mk::cbool(true));
  Form is_false = mk::eq(b, mk::cbool(false));
  std::vector<Location> locs = p1.locs;
  locs.insert(locs.end(), p2.locs.begin(), p2.locs.end());
  std::vector<std::pair<Name, Ty>> binds;
  for (auto& [x, t] : p1.binds) binds.emplace_back(x, join_types(b, t, mk::top()));
  for (auto& [x, t] : p2.binds) binds.emplace_back(x, join_types(b, mk::top(), t));
  std::set<Name> used = free_vars(p1.body);
  free_vars_into(p2.body, used);
  free_vars_into(b, used);
  Name v("v");
  for (int k = 1; used.count(v); ++k) v = Name("v" + std::to_string(k));
  Form body = mk::conj({mk::implies(is_true, embed_type(p1.body, mk::var(v))),
                        mk::implies(is_false, embed_type(p2.body, mk::var(v)))});
  return rebuild(locs, binds, mk::refine(v, body));
}

// ---------------------------------------------------------------------------

bool Checker::proves(const TypeEnv& env, const Form& p) {
  return prover_.valid(env, p).verdict == Verdict::Valid;
}

const Val* Checker::lambda_of(const Val& v) const {
  if (std::holds_alternative<VFun>(v->node)) return &v;
  if (auto* x = std::get_if<VVar>(&v->node)) {
    auto it = lambdas_.find(x->name);
    if (it != lambdas_.end()) return &it->second;
  }
  return nullptr;
}

Ty Checker::type_value(const TypeEnv& env, const HeapEnv& heap, const Val& v) {
  return std::visit(
      overloaded{
          [&](const VConst& n) -> Ty { return in_rule("T-Const", [&] { return ty_const(n.value); }); },
          [&](const VVar& n) -> Ty {
            return in_rule("T-Var", [&] {
              if (!env.lookup(n.name)) fail(ErrorKind::Wf, "unbound variable " + n.name.str());
              return mk::singleton(mk::var(n.name));
            });
          },
          [&](const VLoc& n) -> Ty {
            return in_rule("T-Loc", [&] {
              auto it = static_locs.find(n.loc);
              if (it == static_locs.end()) type_error("no static location for " + n.loc.str());
              if (!has_loc(heap, it->second)) {
                type_error("static location " + it->second.str() + " of " + n.loc.str() + " is not in the heap");
              }
              return self_type(mk::loc(n.loc), {mk::has_typ(self(), mk::ref(it->second))});
            });
          },
          [&](const VFun&) -> Ty { return mk::singleton(to_walk(v)); },
          [&](const VTuple& n) -> Ty {
            for (auto& i : n.items) type_value(env, heap, i);
            return mk::singleton(to_walk(v));
          },
          [&](const VExtend& n) -> Ty {
            return in_rule("T-Extend", [&] {
              Ty d = type_value(env, heap, n.dict);
              Ty k = type_value(env, heap, n.key);
              type_value(env, heap, n.val);
              prover_.sub_type(env, d, mk::refine("d", mk::pred("Dict", {mk::var("d")})));
              prover_.sub_type(env, k, mk::refine("k", mk::pred("Str", {mk::var("k")})));
              return self_type(to_walk(v), {typed_pred("Dict", self())});
            });
          },
      },
      v->node);
}

Subst Checker::world_sat(const TypeEnv& env, const Ty& t, const HeapEnv& heap, const World& w_in) {
  return in_rule("WorldSat", [&] {
    Opened o = open_type(env, t, heap);
    World w = avoid_env(o.env, w_in);
    auto [ls, body] = split_exists_locs(w.type);
    HeapType hh = w.heap;
    if (!ls.empty()) {
      std::set<Location> bound(ls.begin(), ls.end());
      std::set<Location> fixed;
      std::vector<Location> wanted;
      for (auto& b : hh.bindings) {
        const Location& l = binding_loc(b);
        if (bound.count(l)) {
          wanted.push_back(l);
        } else {
          fixed.insert(l);
        }
      }
      std::vector<Location> cands;
      for (auto& b : o.heap.bindings) {
        if (auto* e = std::get_if<EBind>(&b); e && !fixed.count(e->loc)) cands.push_back(e->loc);
      }
      if (cands.size() != wanted.size()) {
        type_error("cannot witness existential locations of " + to_string(w.type) + " in " +
                   to_string(o.heap));
      }
      Subst s;
      for (std::size_t i = 0; i < wanted.size(); ++i) s.locs[wanted[i]] = cands[i];
      body = substitute(s, body);
      hh = substitute(s, hh);
    }
    prover_.sub_type(o.env, o.body, body);
    Subst pi = match_heap_env(o.heap, hh);
    TypeEnv g = o.env.bind(w.binder, o.body);
    std::vector<Form> goals;
    for (auto& f : embed_heap(hh).formulas) goals.push_back(substitute(pi, f));
    Form goal = mk::conj(goals);
    if (!std::holds_alternative<FTrue>(goal->node)) prover_.impl_formula(g, goal);
    return pi;
  });
}

std::optional<Location> Checker::find_ref(const TypeEnv& env, const HeapEnv& heap, const Val& v,
                                          bool need_proto, const std::optional<Location>& proto) {
  Walk w = to_walk(v);
  std::vector<Location> order;
  if (auto* r = std::get_if<VLoc>(&v->node)) {
    type_value(env, heap, v);
    Location m = static_locs.at(r->loc);
    const auto* b = find_binding(heap, m);
    const auto* e = b ? std::get_if<EBind>(b) : nullptr;
    if (!e || (need_proto && !e->proto) || (proto && e->proto != proto)) return std::nullopt;
    return m;
  }
  if (auto* x = std::get_if<VVar>(&v->node)) {
    if (auto* e = env.lookup(x->name)) harvest_refs(embed_type(e->type, w), w, order);
  }
  std::vector<Location> cands;
  for (auto& b : heap.bindings) {
    auto* e = std::get_if<EBind>(&b);
    if (!e) continue;
    if (need_proto && !e->proto) continue;
    if (proto && e->proto != proto) continue;
    cands.push_back(e->loc);
  }
  std::vector<Location> tries;
  for (auto& l : order) {
    if (std::find(cands.begin(), cands.end(), l) != cands.end() &&
        std::find(tries.begin(), tries.end(), l) == tries.end()) {
      tries.push_back(l);
    }
  }
  for (auto it = cands.rbegin(); it != cands.rend(); ++it) {
    if (std::find(tries.begin(), tries.end(), *it) == tries.end()) tries.push_back(*it);
  }
  for (auto& l : tries) {
    if (proves(env, mk::has_typ(w, mk::ref(l)))) return l;
  }
  return std::nullopt;
}

TypedResult Checker::type_expr(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels,
                               const Exp& e) {
  try {
    TypedResult r = dispatch(env, heap, labels, e);
    r.type = prenex(r.type);
    return r;
  } catch (Error& err) {
    err.set_line(e->line);
    throw;
  }
}

TypedResult Checker::dispatch(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels,
                              const Exp& e) {
  return std::visit(
      overloaded{
          [&](const EVal& n) -> TypedResult {
            return in_rule("T-Val", [&] { return TypedResult{type_value(env, heap, n.value), heap}; });
          },
          [&](const ELet& n) -> TypedResult { return type_let(env, heap, labels, n); },
          [&](const EIf& n) -> TypedResult {
            return in_rule("T-If", [&] {
              type_value(env, heap, n.cond);
              Walk b = to_walk(n.cond);
              TypedResult r1 = in_rule("then", [&] {
                return type_expr(env.fact(mk::pred("truthy", {b})), heap, labels, n.then_e);
              });
              TypedResult r2 = in_rule("else", [&] {
                return type_expr(env.fact(mk::pred("falsy", {b})), heap, labels, n.else_e);
              });
              return join(b, r1, r2);
            });
          },
          [&](const ENewRef& n) -> TypedResult {
            return in_rule("T-Ref", [&] {
              wf_location(env, n.loc);
              if (has_loc(heap, n.loc)) type_error("location " + n.loc.str() + " is already allocated");
              type_value(env, heap, n.init);
              HeapEnv out = heap;
              out.bindings.push_back(EBind{n.loc, to_walk(n.init), std::nullopt});
              return TypedResult{mk::ref_type(n.loc), out};
            });
          },
          [&](const EDeref& n) -> TypedResult {
            return in_rule("T-Deref", [&] {
              type_value(env, heap, n.ref);
              auto l = find_ref(env, heap, n.ref, false);
              if (!l) type_error("cannot show " + to_string(n.ref) + " is a reference to a strong location in the heap");
              const auto& b = std::get<EBind>(*find_binding(heap, *l));
              return TypedResult{mk::singleton(b.value), heap};
            });
          },
          [&](const ESetRef& n) -> TypedResult {
            return in_rule("T-Setref", [&] {
              type_value(env, heap, n.ref);
              type_value(env, heap, n.value);
              auto l = find_ref(env, heap, n.ref, false);
              if (!l) type_error("cannot show " + to_string(n.ref) + " is a reference to a strong location in the heap");
              HeapEnv out = heap;
              for (auto& b : out.bindings) {
                if (auto* eb = std::get_if<EBind>(&b); eb && eb->loc == *l) eb->value = to_walk(n.value);
              }
              return TypedResult{mk::singleton(to_walk(n.value)), out};
            });
          },
          [&](const ENewObj& n) -> TypedResult {
            return in_rule("T-NewObj", [&] {
              wf_location(env, n.loc);
              if (has_loc(heap, n.loc)) type_error("location " + n.loc.str() + " is already allocated");
              Ty d = type_value(env, heap, n.dict);
              type_value(env, heap, n.proto);
              prover_.sub_type(env, d, mk::refine("d", mk::pred("Dict", {mk::var("d")})));
              auto l2 = find_ref(env, heap, n.proto, true);
              if (!l2) type_error("prototype " + to_string(n.proto) + " is not a reference to an object in the heap");
              HeapEnv out = heap;
              out.bindings.push_back(EBind{n.loc, to_walk(n.dict), *l2});
              return TypedResult{mk::ref_type(n.loc), out};
            });
          },
          [&](const EApp& n) -> TypedResult { return in_rule("T-App", [&] { return type_app(env, heap, n); }); },
          [&](const EAs& n) -> TypedResult {
            return in_rule("T-As", [&] { return type_as(env, heap, labels, n.body, n.type, true); });
          },
          [&](const EThaw& n) -> TypedResult { return in_rule("T-Thaw", [&] { return type_thaw(env, heap, n); }); },
          [&](const EFreeze& n) -> TypedResult {
            return in_rule("T-Freeze", [&] { return type_freeze(env, heap, n); });
          },
          [&](const ELabel& n) -> TypedResult {
            return in_rule("T-Label", [&] { return type_label(env, heap, labels, n); });
          },
          [&](const EBreak& n) -> TypedResult {
            return in_rule("T-Break", [&] { return type_break(env, heap, labels, n); });
          },
      },
      e->node);
}

TypedResult Checker::type_let(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const ELet& n) {
  if (env.lookup(n.name)) {
    fail(ErrorKind::Structural, "variable " + n.name.str() + " is bound twice; binders must be distinct");
  }
  std::optional<Location> packed;
  if (auto* v = std::get_if<EVal>(&n.bound->node)) {
    if (std::holds_alternative<VFun>(v->value->node)) lambdas_[n.name] = v->value;
  }
  if (auto* r = std::get_if<ENewRef>(&n.bound->node)) {
    if (opts_.exists_loc && r->loc.kind == Location::Kind::StrongConst) packed = r->loc;
  }
  return in_rule(packed ? "T-LetRef-Exists" : "T-Let", [&] {
    TypedResult r1 = type_expr(env, heap, labels, n.bound);
    Opened o = open_type(env, r1.type, r1.heap);
    TypeEnv g = o.env.bind(n.name, o.body);
    TypedResult r2 = type_expr(g, o.heap, labels, n.body);
    Prefix p2 = split(r2.type);
    std::vector<Location> locs;
    if (packed) locs.push_back(*packed);
    for (auto& l : o.locs) {
      if (!packed || l != *packed) locs.push_back(l);
    }
    locs.insert(locs.end(), p2.locs.begin(), p2.locs.end());
    std::vector<std::pair<Name, Ty>> binds = o.binds;
    binds.emplace_back(n.name, o.body);
    binds.insert(binds.end(), p2.binds.begin(), p2.binds.end());
    return TypedResult{rebuild(locs, binds, p2.body), r2.heap};
  });
}

TypedResult Checker::join(const Walk& b, const TypedResult& r1, const TypedResult& r2) {
  return in_rule("Join", [&] {
    if (r1.heap.deep != r2.heap.deep) {
      type_error("branches end with different deep heaps: " + r1.heap.deep.str() + " vs " + r2.heap.deep.str());
    }
    Ty joined = join_types(b, r1.type, r2.type);
    Prefix p = split(joined);
    HeapEnv out;
    out.deep = r1.heap.deep;
    std::vector<Location> order;
    for (auto& x : r1.heap.bindings) order.push_back(binding_loc(x));
    for (auto& x : r2.heap.bindings) {
      if (!find_binding(r1.heap, binding_loc(x))) order.push_back(binding_loc(x));
    }
    for (auto& l : order) {
      const EnvBinding* b1 = find_binding(r1.heap, l);
      const EnvBinding* b2 = find_binding(r2.heap, l);
      const HWeak* w1 = b1 ? std::get_if<HWeak>(b1) : nullptr;
      const HWeak* w2 = b2 ? std::get_if<HWeak>(b2) : nullptr;
      if (w1 || w2) {
        if (!w1 || !w2 || !(w1->state == w2->state)) {
          type_error("branches disagree on thaw state of " + l.str());
        }
        out.bindings.push_back(*w1);
        continue;
      }
      const EBind* e1 = b1 ? &std::get<EBind>(*b1) : nullptr;
      const EBind* e2 = b2 ? &std::get<EBind>(*b2) : nullptr;
      if (e1 && e2 && e1->proto != e2->proto) type_error("branches disagree on the prototype of " + l.str());
      std::optional<Location> proto = e1 ? e1->proto : e2->proto;
      if (e1 && e2 && to_string(e1->value) == to_string(e2->value)) {
        out.bindings.push_back(*e1);
        continue;
      }
      Ty t1 = e1 ? mk::singleton(e1->value) : mk::top();
      Ty t2 = e2 ? mk::singleton(e2->value) : mk::top();
      Name y = Name::fresh("y");
      p.binds.emplace_back(y, join_types(b, t1, t2));
      out.bindings.push_back(EBind{l, mk::var(y), proto});
    }
    return TypedResult{rebuild(p.locs, p.binds, p.body), out};
  });
}

Ty Checker::check_fun(const TypeEnv& env, const LabelEnv& labels, const Val& lambda, const Term& arrow) {
  return in_rule("T-Fun", [&] {
    const auto& fn = std::get<VFun>(lambda->node);
    const auto& a0 = std::get<UArrow>(arrow->node);
    if (!a0.weak_heap.empty() || std::any_of(a0.locvars.begin(), a0.locvars.end(),
                                             [](const Location& l) { return l.is_weak(); })) {
      fail(ErrorKind::Unsupported, "weak-location polymorphism is parsed but not supported by the checker");
    }
    wf_typeterm(env, arrow);
    Subst q;
    UArrow a;
    for (auto& t : a0.tyvars) {
      Name n = env.has_tyvar(t) ? Name::fresh(t.base) : t;
      if (n != t) q.tyvars[t] = n;
      a.tyvars.push_back(n);
    }
    for (auto& l : a0.locvars) {
      Location m = env.has_locvar(l) ? Location{l.kind, Name::fresh(l.name.base)} : l;
      if (m != l) q.locs[l] = m;
      a.locvars.push_back(m);
    }
    for (auto& h : a0.heapvars) {
      Name n = env.has_heapvar(h) ? Name::fresh(h.base) : h;
      if (n != h) q.heapvars[h] = n;
      a.heapvars.push_back(n);
    }
    World w1 = substitute(q, a0.input);
    World w2 = substitute(q, a0.output);
    Name x = w1.binder;
    if (env.lookup(x) ||
        (std::find(fn.params.begin(), fn.params.end(), x) != fn.params.end() && fn.params.size() != 1)) {
      Name y = Name::fresh(x.base);
      Subst s = Subst{}.with(x, mk::var(y));
      w1 = World{y, w1.type, substitute(s, w1.heap)};
      w2 = substitute(s, w2);
      x = y;
    }
    HeapEnvResult he = heap_env(w1.heap);
    w2 = substitute(he.renaming, w2);
    TypeEnv g = bind_quantifiers(env, a).bind(x, w1.type);
    if (fn.params.size() == 1) {
      if (fn.params[0] != x) g = g.bind(fn.params[0], mk::singleton(mk::var(x)));
    } else {
      for (std::size_t i = 0; i < fn.params.size(); ++i) {
        g = g.bind(fn.params[i], mk::singleton(mk::sel(mk::var(x), mk::cint(static_cast<std::int64_t>(i)))));
      }
    }
    for (auto& [z, s] : he.binds) g = g.bind(z, s);
    LabelEnv inner;
    for (auto& [l, _] : labels.labels) inner.outer.push_back(l);
    inner.outer.insert(inner.outer.end(), labels.outer.begin(), labels.outer.end());
    inner.function_output = w2;
    TypedResult body = type_expr(g, he.env, inner, fn.body);
    in_rule("exit", [&] { world_sat(g, body.type, body.heap, w2); });
    return self_type(mk::fun(lambda), {mk::has_typ(self(), arrow)});
  });
}

TypedResult Checker::type_as(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const Exp& e,
                             const Ty& t, bool keep_heap) {
  wf_type(env, t);
  if (auto* v = std::get_if<EVal>(&e->node)) {
    if (const Val* lam = lambda_of(v->value)) {
      std::vector<Term> arrows = arrow_conjuncts(t);
      if (arrows.empty()) type_error("a function value needs an arrow type annotation, got " + to_string(t));
      std::vector<Form> facts;
      for (auto& u : arrows) {
        check_fun(env, labels, *lam, u);
        facts.push_back(mk::has_typ(self(), u));
      }
      facts.push_back(mk::eq(self(), mk::fun(*lam)));
      Ty have = self_type(to_walk(v->value), facts);
      prover_.sub_type(env, have, t);
      return TypedResult{t, heap};
    }
  }
  TypedResult r = type_expr(env, heap, labels, e);
  if (keep_heap && !same_heap(r.heap, heap)) {
    type_error("cast subject changes the heap: " + to_string(heap) + " became " + to_string(r.heap));
  }
  Opened o = open_type(env, r.type, r.heap);
  prover_.sub_type(o.env, o.body, t);
  return TypedResult{t, keep_heap ? heap : r.heap};
}

TypedResult Checker::type_app(const TypeEnv& env, const HeapEnv& heap, const EApp& n) {
  type_value(env, heap, n.fn);
  Ty targ = type_value(env, heap, n.arg);
  Walk f = to_walk(n.fn);
  if (lambda_of(n.fn)) type_error("callee " + to_string(n.fn) + " is an unannotated function");
  std::vector<Term> cands;
  for (auto& p : embed_env(env)) harvest_arrows(p, cands);
  std::optional<UArrow> arrow;
  std::set<std::string> tried;
  for (auto& u : cands) {
    if (!tried.insert(canonical(u)).second) continue;
    if (proves(env, mk::has_typ(f, u))) {
      arrow = std::get<UArrow>(u->node);
      break;
    }
  }
  if (!arrow) type_error("cannot show " + to_string(f) + " is a function");
  const UArrow& a = *arrow;
  if (!a.weak_heap.empty()) {
    fail(ErrorKind::Unsupported, "weak-location polymorphism is parsed but not supported by the checker");
  }
  if (n.types.size() != a.tyvars.size() || (!n.locs.empty() && n.locs.size() != a.locvars.size())) {
    type_error("instantiation arity mismatch: callee expects " + std::to_string(a.tyvars.size()) +
               " type(s) and " + std::to_string(a.locvars.size()) + " location(s)");
  }
  if (!n.heaps.empty() && n.heaps.size() != a.heapvars.size()) {
    type_error("instantiation arity mismatch: callee expects " + std::to_string(a.heapvars.size()) + " heap(s)");
  }
  World w1 = a.input;
  World w2 = a.output;
  {
    std::map<Name, Name> r1;
    Subst s1;
    for (auto& [x, _] : binders(w1)) {
      r1[x] = Name::fresh(x.base);
      s1.terms[x] = mk::var(r1[x]);
    }
    w1 = rename_binders(w1, r1);
    w2 = substitute(s1, w2);
    std::map<Name, Name> r2;
    for (auto& [x, _] : binders(w2)) r2[x] = Name::fresh(x.base);
    w2 = rename_binders(w2, r2);
  }
  std::vector<Location> locs = n.locs;
  if (locs.empty() && !a.locvars.empty()) locs = infer_locs(env, heap, n.arg, w1, a.locvars);
  for (std::size_t i = 0; i < a.tyvars.size(); ++i) {
    wf_type(env, n.types[i]);
    w1 = tinst(w1, a.tyvars[i], n.types[i]);
    w2 = tinst(w2, a.tyvars[i], n.types[i]);
  }
  Subst ls;
  for (std::size_t i = 0; i < a.locvars.size(); ++i) {
    wf_location(env, locs[i]);
    ls.locs[a.locvars[i]] = locs[i];
  }
  if (!ls.empty()) {
    w1 = substitute(ls, w1);
    w2 = substitute(ls, w2);
  }
  std::vector<HeapType> heaps = n.heaps;
  if (heaps.empty() && !a.heapvars.empty()) {
    if (a.heapvars.size() != 1 || w1.heap.deep != a.heapvars[0]) {
      type_error("cannot infer heap instantiation; give it explicitly");
    }
    std::set<Location> shallow;
    for (auto& b : w1.heap.bindings) shallow.insert(binding_loc(b));
    HeapType frame;
    frame.deep = heap.deep;
    for (auto& b : heap.bindings) {
      if (shallow.count(binding_loc(b))) continue;
      if (auto* e = std::get_if<EBind>(&b)) {
        frame.bindings.push_back(HBind{e->loc, Name::fresh("f"), mk::singleton(e->value), e->proto});
      } else {
        frame.bindings.push_back(std::get<HWeak>(b));
      }
    }
    heaps.push_back(frame);
  } else {
    for (auto& h : heaps) wf_heap(env, h);
  }
  for (std::size_t i = 0; i < a.heapvars.size(); ++i) {
    Subst hv;
    hv.heapvars[a.heapvars[i]] = heaps[i].deep;
    w1 = World{w1.binder, substitute(hv, w1.type), expand(w1.heap, a.heapvars[i], heaps[i])};
    w2 = World{w2.binder, substitute(hv, w2.type), expand(w2.heap, a.heapvars[i], freshen_heap(heaps[i]))};
    w1.heap = substitute(hv, w1.heap);
    w2.heap = substitute(hv, w2.heap);
  }
  Subst pi = in_rule("argument", [&] { return world_sat(env, targ, heap, w1); });
  pi.terms[w1.binder] = to_walk(n.arg);
  World out{w2.binder, substitute(pi, w2.type), substitute(pi, w2.heap)};
  auto [ls2, t12] = split_exists_locs(out.type);
  if (!ls2.empty()) {
    Subst sk;
    for (auto& l : ls2) sk.locs[l] = skolem(l);
    t12 = substitute(sk, t12);
    out.heap = substitute(sk, out.heap);
  }
  HeapEnvResult he = heap_env(out.heap);
  inline_singletons(he);
  Prefix p = split(prenex(t12));
  std::vector<std::pair<Name, Ty>> binds = p.binds;
  binds.emplace_back(out.binder, p.body);
  for (auto& b : he.binds) binds.push_back(b);
  return TypedResult{rebuild(p.locs, binds, mk::singleton(mk::var(out.binder))), he.env};
}

std::vector<Location> Checker::infer_locs(const TypeEnv& env, const HeapEnv& heap, const Val& arg, const World& w1,
                                         const std::vector<Location>& vars) {
  return in_rule("infer-locations", [&] {
    std::set<Location> wanted(vars.begin(), vars.end());
    Form input = substitute(Subst{}.with(w1.binder, to_walk(arg)), embed_type(w1.type, mk::var(w1.binder)));
    std::vector<std::pair<Walk, Location>> atoms;
    harvest_ref_atoms(input, wanted, atoms);
    std::map<Location, Location> found;
    bool progress = true;
    while (progress) {
      progress = false;
      for (auto& [t, l] : atoms) {
        if (found.count(l)) continue;
        for (auto& b : heap.bindings) {
          auto* e = std::get_if<EBind>(&b);
          if (!e) continue;
          if (proves(env, mk::disj({mk::has_typ(t, mk::ref(e->loc)), mk::eq(t, mk::null())}))) {
            found[l] = e->loc;
            progress = true;
            break;
          }
        }
      }
      for (auto& b : w1.heap.bindings) {
        auto* hb = std::get_if<HBind>(&b);
        if (!hb || !found.count(hb->loc) || !hb->proto || !wanted.count(*hb->proto) || found.count(*hb->proto)) {
          continue;
        }
        const EnvBinding* eb = find_binding(heap, found[hb->loc]);
        if (eb && std::holds_alternative<EBind>(*eb) && std::get<EBind>(*eb).proto) {
          found[*hb->proto] = *std::get<EBind>(*eb).proto;
          progress = true;
        }
      }
    }
    std::vector<Location> out;
    for (auto& l : vars) {
      auto it = found.find(l);
      if (it == found.end()) type_error("cannot infer location argument " + l.str() + "; give it explicitly");
      out.push_back(it->second);
    }
    return out;
  });
}

TypedResult Checker::type_thaw(const TypeEnv& env, const HeapEnv& heap, const EThaw& n) {
  type_value(env, heap, n.ref);
  Walk v = to_walk(n.ref);
  const EnvEntry* sig = nullptr;
  for (const EnvEntry* e : env.entries()) {
    if (e->kind != EnvEntry::Kind::Weak || !has_loc(heap, e->loc)) continue;
    if (proves(env, mk::has_typ(v, mk::ref(e->loc)))) {
      sig = e;
      break;
    }
  }
  if (!sig) type_error("cannot show " + to_string(v) + " is a reference to a weak location in the heap");
  const auto& st = std::get<HWeak>(*find_binding(heap, sig->loc));
  if (!st.state.frozen()) {
    type_error(sig->loc.str() + " is already thawed to " + st.state.thawed->str());
  }
  wf_location(env, n.loc);
  if (has_loc(heap, n.loc)) type_error("location " + n.loc.str() + " is already in the heap");
  for (auto& b : heap.bindings) {
    if (auto* w = std::get_if<HWeak>(&b); w && w->state.thawed == n.loc) {
      type_error("location " + n.loc.str() + " is already the thawed alias of " + w->loc.str());
    }
  }
  Name x = Name::fresh("x");
  HeapEnv out;
  out.deep = heap.deep;
  for (auto& b : heap.bindings) {
    if (binding_loc(b) == sig->loc) {
      out.bindings.push_back(HWeak{sig->loc, ThawState::thwd(n.loc)});
    } else {
      out.bindings.push_back(b);
    }
  }
  out.bindings.push_back(EBind{n.loc, mk::var(x), sig->proto});
  Name y("y");
  if (free_vars(v).count(y)) y = Name::fresh("y");
  Ty s = mk::refine(y, mk::ite(mk::eq(v, mk::null()), mk::eq(mk::var(y), mk::null()),
                               mk::has_typ(mk::var(y), mk::ref(n.loc))));
  return TypedResult{mk::exists(x, sig->type, s), out};
}

TypedResult Checker::type_freeze(const TypeEnv& env, const HeapEnv& heap, const EFreeze& n) {
  type_value(env, heap, n.ref);
  const EnvEntry* sig = env.weak_sig(n.weak);
  if (!sig) type_error("no invariant declared for weak location " + n.weak.str());
  const EnvBinding* wb = find_binding(heap, n.weak);
  if (!wb || !std::holds_alternative<HWeak>(*wb)) type_error("weak location " + n.weak.str() + " is not in the heap");
  const ThawState& cur = std::get<HWeak>(*wb).state;
  if (!(cur == n.state)) {
    type_error("freeze expects " + n.weak.str() + " to be " + n.state.str() + " but the heap has " + cur.str());
  }
  std::optional<Location> l;
  if (n.state.thawed) {
    l = *n.state.thawed;
    if (!proves(env, mk::has_typ(to_walk(n.ref), mk::ref(*l)))) {
      type_error("cannot show " + to_string(n.ref) + " :: Ref " + l->str());
    }
  } else {
    l = find_ref(env, heap, n.ref, true, sig->proto);
    if (!l) type_error("cannot show " + to_string(n.ref) + " is a reference to an object with prototype " + sig->proto.str());
  }
  const EnvBinding* sb = find_binding(heap, *l);
  if (!sb || !std::holds_alternative<EBind>(*sb)) type_error("location " + l->str() + " is not in the heap");
  const auto& eb = std::get<EBind>(*sb);
  if (eb.proto != sig->proto) {
    type_error("object at " + l->str() + " does not have prototype " + sig->proto.str());
  }
  in_rule("invariant", [&] { prover_.sub_type(env, mk::singleton(eb.value), sig->type); });
  HeapEnv out;
  out.deep = heap.deep;
  for (auto& b : heap.bindings) {
    const Location& bl = binding_loc(b);
    if (bl == *l) continue;
    if (bl == n.weak) {
      out.bindings.push_back(HWeak{n.weak, ThawState::frzn()});
    } else {
      out.bindings.push_back(b);
    }
  }
  Ty t = mk::refine("v", mk::conj({mk::has_typ(mk::var("v"), mk::ref(n.weak)), mk::neq(mk::var("v"), mk::null())}));
  return TypedResult{t, out};
}

TypedResult Checker::type_label(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const ELabel& n) {
  World w;
  if (n.world) {
    w = *n.world;
    wf_world(env, w);
  } else if (!breaks_to(n.body, n.label)) {
    LabelEnv inner = labels;
    inner.labels.erase(n.label);
    inner.outer.push_back(n.label);
    return type_expr(env, heap, inner, n.body);
  } else if (labels.function_output) {
    w = *labels.function_output;
  } else {
    type_error("label @" + n.label.str() + " has no world annotation and is not inside a function");
  }
  LabelEnv inner = labels;
  inner.labels[n.label] = w;
  TypedResult body = type_expr(env, heap, inner, n.body);
  Opened o = open_type(env, body.type, body.heap);
  if (!proves(o.env, mk::fls())) {
    in_rule("fall-through", [&] { world_sat(env, body.type, body.heap, w); });
  }
  auto [ls, t] = split_exists_locs(w.type);
  HeapType hh = w.heap;
  std::vector<Location> locs;
  if (!ls.empty()) {
    Subst s;
    for (auto& l : ls) {
      Location m{l.kind, Name::fresh(l.name.base)};
      s.locs[l] = m;
      locs.push_back(m);
    }
    t = substitute(s, t);
    hh = substitute(s, hh);
  }
  World fresh_w = avoid_env(env, World{w.binder, t, hh});
  HeapEnvResult he = heap_env(fresh_w.heap);
  std::set<Name> heap_fv = free_vars(fresh_w.heap);
  Prefix p = split(prenex(fresh_w.type));
  locs.insert(locs.end(), p.locs.begin(), p.locs.end());
  std::vector<std::pair<Name, Ty>> binds = p.binds;
  Ty result_body;
  if (heap_fv.count(fresh_w.binder)) {
    binds.emplace_back(fresh_w.binder, p.body);
    result_body = mk::singleton(mk::var(fresh_w.binder));
  } else {
    result_body = p.body;
  }
  for (auto& b : he.binds) binds.push_back(b);
  return TypedResult{rebuild(locs, binds, result_body), he.env};
}

TypedResult Checker::type_break(const TypeEnv& env, const HeapEnv& heap, const LabelEnv& labels, const EBreak& n) {
  auto it = labels.labels.find(n.label);
  if (it == labels.labels.end()) {
    if (std::find(labels.outer.begin(), labels.outer.end(), n.label) != labels.outer.end()) {
      type_error("break @" + n.label.str() + " crosses a function boundary");
    }
    type_error("unbound label @" + n.label.str());
  }
  Ty t = type_value(env, heap, n.value);
  world_sat(env, t, heap, it->second);
  return TypedResult{mk::bottom(), heap};
}

}  // namespace dimp
