#include "dimp/subtype.hpp"

#include <set>

#include "dimp/error.hpp"
#include "dimp/logic.hpp"
#include "dimp/printer.hpp"

namespace dimp {

namespace {

[[noreturn]] void type_error(const std::string& msg) { fail(ErrorKind::Type, msg); }

void harvest_hastyp(const Form& p, std::vector<Term>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, FHasTyp>) {
          out.push_back(n.type);
        } else if constexpr (std::is_same_v<N, FAnd> || std::is_same_v<N, FOr>) {
          for (auto& i : n.items) harvest_hastyp(i, out);
        } else if constexpr (std::is_same_v<N, FNot>) {
          harvest_hastyp(n.body, out);
        } else if constexpr (std::is_same_v<N, FImplies>) {
          harvest_hastyp(n.lhs, out);
          harvest_hastyp(n.rhs, out);
        } else if constexpr (std::is_same_v<N, FIte>) {
          harvest_hastyp(n.cond, out);
          harvest_hastyp(n.then_f, out);
          harvest_hastyp(n.else_f, out);
        }
      },
      p->node);
}

bool same_kind(const Term& a, const Term& b) { return a->node.index() == b->node.index(); }

std::string clause_text(const Clause& c) {
  std::string out;
  for (std::size_t i = 0; i < c.hyps.size(); ++i) out += (i ? ", " : "") + to_string(c.hyps[i]);
  out += out.empty() ? "⊢ " : " ⊢ ";
  for (std::size_t i = 0; i < c.goals.size(); ++i) out += (i ? " ∨ " : "") + to_string(c.goals[i]);
  return out;
}

class DepthGuard {
 public:
  explicit DepthGuard(int& d) : d_(d) {
    if (++d_ > Prover::kFuel) {
      --d_;
      type_error("subtyping fuel exhausted (nested arrow depth exceeds " +
                 std::to_string(Prover::kFuel) + ")");
    }
  }
  ~DepthGuard() { --d_; }
  DepthGuard(const DepthGuard&) = delete;
  DepthGuard& operator=(const DepthGuard&) = delete;

 private:
  int& d_;
};

// Renames ∃ℓ̄ of `t` (and the heap it scopes over) to `target`, positionally.
Subst loc_renaming(const std::vector<Location>& from, const std::vector<Location>& to) {
  Subst s;
  for (std::size_t i = 0; i < from.size(); ++i) s.locs[from[i]] = to[i];
  return s;
}

TypeEnv bind_locs(TypeEnv env, const std::vector<Location>& ls) {
  for (auto& l : ls) {
    if (l.is_var() && !env.has_locvar(l)) env = env.locvar(l);
  }
  return env;
}

}  // namespace

std::pair<std::vector<Location>, Ty> split_exists_locs(const Ty& t) {
  std::vector<Location> ls;
  Ty cur = t;
  while (auto* el = std::get_if<TExistsLoc>(&cur->node)) {
    ls.push_back(el->loc);
    cur = el->body;
  }
  return {ls, cur};
}

TypeEnv bind_world(const TypeEnv& env, const World& w) {
  TypeEnv out = env.bind(w.binder, w.type);
  for (auto& b : w.heap.bindings) {
    if (auto* hb = std::get_if<HBind>(&b)) out = out.bind(hb->binder, hb->type);
  }
  return out;
}

World avoid_env(const TypeEnv& env, const World& w) {
  std::map<Name, Name> ren;
  for (auto& [x, _] : binders(w)) {
    if (env.lookup(x)) ren[x] = Name::fresh(x.base);
  }
  if (ren.empty()) return w;
  return rename_binders(w, ren);
}

OracleResult Prover::valid(const TypeEnv& env, const Form& p) {
  Obligation ob{embed_env(env), p};
  OracleResult r = oracle_->check(ob);
  if (r.verdict == Verdict::Unknown) saw_unknown_ = true;
  return r;
}

bool Prover::prove_atom(const TypeEnv& env, const Form& q, std::vector<std::string>& notes) {
  OracleResult r = valid(env, q);
  if (r.verdict == Verdict::Valid) return true;
  if (auto* h = std::get_if<FHasTyp>(&q->node)) {
    std::vector<Term> candidates;
    for (auto& f : embed_env(env)) harvest_hastyp(f, candidates);
    std::set<std::string> tried{canonical(h->type)};
    for (auto& u : candidates) {
      if (!same_kind(u, h->type) || !tried.insert(canonical(u)).second) continue;
      if (valid(env, mk::has_typ(h->term, u)).verdict != Verdict::Valid) continue;
      try {
        in_rule("I-HasTyp", [&] { syn_sub(env, u, h->type); });
        return true;
      } catch (Error& e) {
        if (e.kind() != ErrorKind::Type) throw;
        notes.push_back("candidate " + to_string(u) + " rejected: " + e.message());
      }
    }
  }
  if (r.verdict == Verdict::Invalid && !r.model.empty()) notes.push_back("countermodel: " + r.model);
  if (r.verdict == Verdict::Unknown && !r.detail.empty()) notes.push_back("oracle: " + r.detail);
  return false;
}

void Prover::impl_formula(const TypeEnv& env, const Form& p) {
  bool unknown_before = saw_unknown_;
  saw_unknown_ = false;
  OracleResult whole = valid(env, p);
  if (whole.verdict == Verdict::Valid) {
    saw_unknown_ = unknown_before;
    return;
  }
  std::vector<Clause> clauses = in_rule("I-Cnf", [&] { return cnf(p); });
  for (auto& c : clauses) {
    TypeEnv g = env;
    for (auto& h : c.hyps) g = g.fact(h);
    std::vector<std::string> notes;
    bool single_plain = clauses.size() == 1 && c.hyps.empty() && c.goals.size() == 1 &&
                        !std::holds_alternative<FHasTyp>(c.goals[0]->node);
    bool ok = false;
    if (!single_plain) {
      for (auto& q : c.goals) {
        if (prove_atom(g, q, notes)) {
          ok = true;
          break;
        }
      }
    } else if (whole.verdict == Verdict::Invalid && !whole.model.empty()) {
      notes.push_back("countermodel: " + whole.model);
    } else if (whole.verdict == Verdict::Unknown && !whole.detail.empty()) {
      notes.push_back("oracle: " + whole.detail);
    }
    if (!ok) {
      Error e(ErrorKind::Type, "cannot prove " + to_string(p));
      e.add_note("failing clause: " + clause_text(c));
      for (auto& n : notes) e.add_note(n);
      if (saw_unknown_) {
        e.add_note("the oracle answered unknown");
        e.set_solver_failure();
      }
      saw_unknown_ = unknown_before || saw_unknown_;
      throw e;
    }
  }
  saw_unknown_ = unknown_before || saw_unknown_;
}

void Prover::sub_type(const TypeEnv& env, const Ty& t1, const Ty& t2) {
  if (canonical(t1) == canonical(t2)) return;
  auto* l1 = std::get_if<TExistsLoc>(&t1->node);
  auto* l2 = std::get_if<TExistsLoc>(&t2->node);
  if (l1 && l2) {
    in_rule("S-ExistsLoc", [&] {
      Ty body2 = substitute(loc_renaming({l2->loc}, {l1->loc}), l2->body);
      sub_type(bind_locs(env, {l1->loc}), l1->body, body2);
    });
    return;
  }
  if (l2) type_error("existential location quantifiers differ: " + to_string(t1) + " vs " + to_string(t2));
  if (l1) {
    sub_type(bind_locs(env, {l1->loc}), l1->body, t2);
    return;
  }
  auto* e1 = std::get_if<TExists>(&t1->node);
  auto* e2 = std::get_if<TExists>(&t2->node);
  if (e2) {
    in_rule("S-Exists", [&] {
      if (!e1) type_error("cannot establish existential type " + to_string(t2) + " from " + to_string(t1));
      sub_type(env, e1->bound, e2->bound);
      Name x = env.lookup(e1->binder) ? Name::fresh(e1->binder.base) : e1->binder;
      Ty b1 = x == e1->binder ? e1->body : substitute(Subst{}.with(e1->binder, mk::var(x)), e1->body);
      Ty b2 = substitute(Subst{}.with(e2->binder, mk::var(x)), e2->body);
      sub_type(env.bind(x, e1->bound), b1, b2);
    });
    return;
  }
  if (e1) {
    Name x = env.lookup(e1->binder) ? Name::fresh(e1->binder.base) : e1->binder;
    Ty b1 = x == e1->binder ? e1->body : substitute(Subst{}.with(e1->binder, mk::var(x)), e1->body);
    sub_type(env.bind(x, e1->bound), b1, t2);
    return;
  }
  const auto& r1 = std::get<TRefine>(t1->node);
  const auto& r2 = std::get<TRefine>(t2->node);
  in_rule("S-Refine", [&] {
    Name x = env.lookup(r1.binder) ? Name::fresh(r1.binder.base) : r1.binder;
    Form p = x == r1.binder ? r1.pred : substitute(Subst{}.with(r1.binder, mk::var(x)), r1.pred);
    Form q = substitute(Subst{}.with(r2.binder, mk::var(x)), r2.pred);
    impl_formula(env.bind(x, mk::top()).fact(p), q);
  });
}

void Prover::syn_sub(const TypeEnv& env, const Term& u1, const Term& u2) {
  DepthGuard guard(depth_);
  if (auto* a = std::get_if<UTyVar>(&u1->node)) {
    auto* b = std::get_if<UTyVar>(&u2->node);
    if (!b || a->name != b->name) type_error("type terms differ: " + to_string(u1) + " vs " + to_string(u2));
    return;
  }
  if (auto* a = std::get_if<UArray>(&u1->node)) {
    auto* b = std::get_if<UArray>(&u2->node);
    if (!b) type_error("type terms differ: " + to_string(u1) + " vs " + to_string(u2));
    in_rule("U-Array", [&] {
      sub_type(env, a->elem, b->elem);
      sub_type(env, b->elem, a->elem);
    });
    return;
  }
  if (auto* a = std::get_if<URef>(&u1->node)) {
    auto* b = std::get_if<URef>(&u2->node);
    if (!b || a->loc != b->loc) type_error("type terms differ: " + to_string(u1) + " vs " + to_string(u2));
    return;
  }
  if (std::holds_alternative<UNull>(u1->node)) {
    if (!std::holds_alternative<UNull>(u2->node)) {
      type_error("type terms differ: " + to_string(u1) + " vs " + to_string(u2));
    }
    return;
  }
  const auto& a1 = std::get<UArrow>(u1->node);
  auto* a2p = std::get_if<UArrow>(&u2->node);
  if (!a2p) type_error("type terms differ: " + to_string(u1) + " vs " + to_string(u2));
  const auto& a2 = *a2p;
  in_rule("U-Arrow", [&] {
    if (!a1.weak_heap.empty() || !a2.weak_heap.empty()) {
      fail(ErrorKind::Unsupported, "weak-location polymorphism is not supported by the checker");
    }
    if (a1.tyvars.size() != a2.tyvars.size() || a1.locvars.size() != a2.locvars.size() ||
        a1.heapvars.size() != a2.heapvars.size()) {
      type_error("arrow quantifier arity mismatch: " + to_string(u1) + " vs " + to_string(u2));
    }
    Subst s1, s2;
    UArrow common;
    for (std::size_t i = 0; i < a1.tyvars.size(); ++i) {
      Name n = Name::fresh(a1.tyvars[i].base);
      s1.tyvars[a1.tyvars[i]] = n;
      s2.tyvars[a2.tyvars[i]] = n;
      common.tyvars.push_back(n);
    }
    for (std::size_t i = 0; i < a1.locvars.size(); ++i) {
      Location l{a1.locvars[i].kind, Name::fresh(a1.locvars[i].name.base)};
      s1.locs[a1.locvars[i]] = l;
      s2.locs[a2.locvars[i]] = l;
      common.locvars.push_back(l);
    }
    for (std::size_t i = 0; i < a1.heapvars.size(); ++i) {
      Name n = Name::fresh(a1.heapvars[i].base);
      s1.heapvars[a1.heapvars[i]] = n;
      s2.heapvars[a2.heapvars[i]] = n;
      common.heapvars.push_back(n);
    }
    World w11 = substitute(s1, a1.input);
    World w12 = substitute(s1, a1.output);
    World w21 = substitute(s2, a2.input);
    World w22 = substitute(s2, a2.output);
    std::map<Name, Name> ren;
    Subst rs;
    for (auto& [x, _] : binders(w21)) {
      ren[x] = Name::fresh(x.base);
      rs.terms[x] = mk::var(ren[x]);
    }
    w21 = rename_binders(w21, ren);
    w22 = substitute(rs, w22);
    TypeEnv g = env;
    for (auto& n : common.tyvars) g = g.tyvar(n);
    for (auto& l : common.locvars) g = g.locvar(l);
    for (auto& h : common.heapvars) g = g.heapvar(h);
    Subst pi = in_rule("input", [&] { return sub_world(g, w21, w11); });
    auto [locs21, _] = split_exists_locs(w21.type);
    TypeEnv g2 = bind_world(bind_locs(g, locs21), w21);
    in_rule("output", [&] { sub_world(g2, substitute(pi, w12), w22); });
  });
}

Subst match_heaps(const HeapType& h1, const HeapType& h2) {
  return in_rule("H-Match", [&] {
    auto perm = heap_permutation(h1.bindings, h2.bindings);
    if (!perm) {
      type_error("heaps bind different locations: " + to_string(h1) + " vs " + to_string(h2));
    }
    Subst pi;
    for (std::size_t i = 0; i < h1.bindings.size(); ++i) {
      const HeapBinding& b1 = h1.bindings[i];
      const HeapBinding& b2 = h2.bindings[(*perm)[i]];
      const auto* s1 = std::get_if<HBind>(&b1);
      const auto* s2 = std::get_if<HBind>(&b2);
      if (s1 && s2) {
        if (s1->proto != s2->proto) {
          type_error("prototype links differ at " + s1->loc.str());
        }
        pi.terms[s2->binder] = mk::var(s1->binder);
        continue;
      }
      const auto* w1 = std::get_if<HWeak>(&b1);
      const auto* w2 = std::get_if<HWeak>(&b2);
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

Subst Prover::sub_world(const TypeEnv& env, const World& w1in, const World& w2in) {
  return in_rule("S-World", [&] {
    World w1 = avoid_env(env, w1in);
    World w2 = w2in;
    auto [ls1, body1] = split_exists_locs(w1.type);
    auto [ls2, body2] = split_exists_locs(w2.type);
    if (ls1.size() != ls2.size()) {
      type_error("existential location quantifiers differ: " + to_string(w1.type) + " vs " +
                 to_string(w2.type));
    }
    Subst lr = loc_renaming(ls2, ls1);
    w1.type = body1;
    w2 = World{w2.binder, substitute(lr, body2), substitute(lr, w2.heap)};
    TypeEnv g = bind_locs(env, ls1);
    sub_type(g, w1.type, w2.type);
    if (w1.heap.deep != w2.heap.deep) {
      type_error("deep heap parts differ: " + w1.heap.deep.str() + " vs " + w2.heap.deep.str());
    }
    Subst pi = match_heaps(w1.heap, w2.heap);
    pi.terms[w2.binder] = mk::var(w1.binder);
    TypeEnv g1 = bind_world(g, w1);
    std::vector<Form> goals;
    for (auto& f : embed_heap(w2.heap).formulas) goals.push_back(substitute(pi, f));
    Form goal = mk::conj(goals);
    if (!std::holds_alternative<FTrue>(goal->node)) impl_formula(g1, goal);
    return pi;
  });
}

}  // namespace dimp
