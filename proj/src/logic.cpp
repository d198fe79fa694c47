#include "dimp/logic.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "dimp/error.hpp"
#include "dimp/printer.hpp"
#include "dimp/subst.hpp"

namespace dimp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Form embed_type(const Ty& t, const Walk& w) {
  return std::visit(overloaded{
                        [&](const TRefine& n) -> Form {
                          if (auto* v = std::get_if<WVar>(&w->node); v && v->name == n.binder) {
                            return n.pred;
                          }
                          return substitute(Subst{}.with(n.binder, w), n.pred);
                        },
                        [&](const TExists& n) -> Form {
                          Name y = Name::fresh(n.binder.base);
                          Ty body = substitute(Subst{}.with(n.binder, mk::var(y)), n.body);
                          return mk::conj({embed_type(n.bound, mk::var(y)), embed_type(body, w)});
                        },
                        [&](const TExistsLoc& n) -> Form { return embed_type(n.body, w); },
                    },
                    t->node);
}

std::string HeapEmbedding::str() const {
  std::string out;
  for (auto& d : dummies) {
    if (!out.empty()) out += ", ";
    out += "<" + d.str() + ":Top>";
  }
  for (auto& f : formulas) {
    if (!out.empty()) out += ", ";
    out += to_string(f);
  }
  return out;
}

HeapEmbedding embed_heap(const HeapType& h) {
  HeapEmbedding out;
  auto bs = binders(h);
  for (auto& [x, _] : bs) out.dummies.push_back(x);
  for (auto& [x, t] : bs) out.formulas.push_back(embed_type(t, mk::var(x)));
  return out;
}

HeapEmbedding embed_world(const World& w) {
  HeapEmbedding out;
  auto bs = binders(w);
  for (auto& [x, _] : bs) out.dummies.push_back(x);
  for (auto& [x, t] : bs) out.formulas.push_back(embed_type(t, mk::var(x)));
  return out;
}

std::vector<Form> embed_env(const TypeEnv& env) {
  std::vector<Form> out;
  for (const EnvEntry* e : env.entries()) {
    if (e->kind == EnvEntry::Kind::Var) {
      Form p = embed_type(e->type, mk::var(e->name));
      if (!std::holds_alternative<FTrue>(p->node)) out.push_back(p);
    } else if (e->kind == EnvEntry::Kind::Fact) {
      if (!std::holds_alternative<FTrue>(e->fact->node)) out.push_back(e->fact);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CNF

bool is_atom(const Form& p) {
  return std::holds_alternative<FEq>(p->node) || std::holds_alternative<FPred>(p->node) ||
         std::holds_alternative<FHasTyp>(p->node) || std::holds_alternative<FHeapHas>(p->node);
}

namespace {

struct Lit {
  Form atom;
  std::string key;
  bool positive;
};
using LitClause = std::vector<Lit>;
using LitCnf = std::vector<LitClause>;

std::size_t literal_count(const LitCnf& c) {
  std::size_t n = 0;
  for (auto& cl : c) n += cl.size();
  return n;
}

void guard(const LitCnf& c) {
  if (literal_count(c) > kCnfLiteralLimit) {
    fail(ErrorKind::Unsupported, "formula too large for CNF conversion (more than " +
                                     std::to_string(kCnfLiteralLimit) + " literals)");
  }
}

// Normalizes a clause; returns false for tautologies.
bool normalize(LitClause& cl) {
  std::sort(cl.begin(), cl.end(), [](const Lit& a, const Lit& b) {
    return a.key != b.key ? a.key < b.key : a.positive < b.positive;
  });
  LitClause out;
  for (auto& l : cl) {
    if (!out.empty() && out.back().key == l.key) {
      if (out.back().positive != l.positive) return false;
      continue;
    }
    out.push_back(l);
  }
  cl = std::move(out);
  return true;
}

LitCnf conjoin(LitCnf a, const LitCnf& b) {
  a.insert(a.end(), b.begin(), b.end());
  guard(a);
  return a;
}

LitCnf disjoin(const LitCnf& a, const LitCnf& b) {
  LitCnf out;
  for (auto& x : a) {
    for (auto& y : b) {
      LitClause cl = x;
      cl.insert(cl.end(), y.begin(), y.end());
      if (normalize(cl)) out.push_back(std::move(cl));
      if (literal_count(out) > kCnfLiteralLimit) guard(out);
    }
  }
  return out;
}

const LitCnf kTrue{};
const LitCnf kFalse{LitClause{}};

LitCnf convert(const Form& p, bool positive) {
  return std::visit(
      overloaded{
          [&](const FTrue&) { return positive ? kTrue : kFalse; },
          [&](const FFalse&) { return positive ? kFalse : kTrue; },
          [&](const FNot& n) { return convert(n.body, !positive); },
          [&](const FAnd& n) {
            LitCnf acc = positive ? kTrue : kFalse;
            for (auto& i : n.items) {
              acc = positive ? conjoin(acc, convert(i, true)) : disjoin(acc, convert(i, false));
            }
            return acc;
          },
          [&](const FOr& n) {
            LitCnf acc = positive ? kFalse : kTrue;
            for (auto& i : n.items) {
              acc = positive ? disjoin(acc, convert(i, true)) : conjoin(acc, convert(i, false));
            }
            return acc;
          },
          [&](const FImplies& n) {
            if (positive) return disjoin(convert(n.lhs, false), convert(n.rhs, true));
            return conjoin(convert(n.lhs, true), convert(n.rhs, false));
          },
          [&](const FIte& n) {
            // (c ⇒ a) ∧ (¬c ⇒ b), and its negation (c ∧ ¬a) ∨ (¬c ∧ ¬b)
            // ≡ (¬c ∨ ¬a) ∧ (c ∨ ¬b).
            LitCnf left = disjoin(convert(n.cond, false), convert(n.then_f, positive));
            LitCnf right = disjoin(convert(n.cond, true), convert(n.else_f, positive));
            return conjoin(left, right);
          },
          [&](const auto&) {
            return LitCnf{LitClause{Lit{p, to_string(p), positive}}};
          },
      },
      p->node);
}

}  // namespace

std::vector<Clause> cnf(const Form& p) {
  LitCnf lits = convert(p, true);
  std::vector<Clause> out;
  std::set<std::string> seen;
  for (auto& cl : lits) {
    if (!normalize(cl)) continue;
    std::string key;
    for (auto& l : cl) key += (l.positive ? "+" : "-") + l.key + ";";
    if (!seen.insert(key).second) continue;
    Clause c;
    for (auto& l : cl) (l.positive ? c.goals : c.hyps).push_back(l.atom);
    if (c.goals.empty()) c.goals.push_back(mk::fls());
    out.push_back(std::move(c));
  }
  return out;
}

Form clause_formula(const Clause& c) {
  return mk::implies(mk::conj(c.hyps), mk::disj(c.goals));
}

// ---------------------------------------------------------------------------
// TInst

namespace {

class Instantiator {
 public:
  Instantiator(Name a, const Ty& t) : a_(std::move(a)) {
    const auto* r = std::get_if<TRefine>(&t->node);
    if (!r) {
      fail(ErrorKind::Type, "type variable " + a_.str() +
                                " cannot be instantiated with the existential type " + to_string(t));
    }
    binder_ = r->binder;
    pred_ = r->pred;
    fv_ = free_vars(t);
    for (auto& n : free_tyvars(r->pred)) ftv_.insert(n);
  }

  Form form(const Form& p) const {
    return std::visit(
        overloaded{
            [&](const FHasTyp& n) -> Form {
              if (auto* v = std::get_if<UTyVar>(&n.type->node)) {
                if (v->name == a_) return substitute(Subst{}.with(binder_, n.term), pred_);
                return p;
              }
              Term u = term(n.type);
              return u == n.type ? p : mk::has_typ(n.term, u);
            },
            [&](const FAnd& n) -> Form {
              std::vector<Form> items;
              for (auto& i : n.items) items.push_back(form(i));
              return std::make_shared<const Formula>(Formula{FAnd{std::move(items)}});
            },
            [&](const FOr& n) -> Form {
              std::vector<Form> items;
              for (auto& i : n.items) items.push_back(form(i));
              return std::make_shared<const Formula>(Formula{FOr{std::move(items)}});
            },
            [&](const FNot& n) -> Form { return mk::neg(form(n.body)); },
            [&](const FImplies& n) -> Form { return mk::implies(form(n.lhs), form(n.rhs)); },
            [&](const FIte& n) -> Form {
              return mk::ite(form(n.cond), form(n.then_f), form(n.else_f));
            },
            [&](const auto&) -> Form { return p; },
        },
        p->node);
  }

  Term term(const Term& u) const {
    if (auto* arr = std::get_if<UArray>(&u->node)) return mk::array(type(arr->elem));
    const auto* a = std::get_if<UArrow>(&u->node);
    if (!a) return u;
    if (std::count(a->tyvars.begin(), a->tyvars.end(), a_)) return u;
    UArrow out = *a;
    // Quantifiers that would capture free type variables of the instance.
    Subst rename;
    for (auto& tv : out.tyvars) {
      if (ftv_.count(tv)) {
        Name fresh = Name::fresh(tv.base);
        rename.tyvars[tv] = fresh;
        tv = fresh;
      }
    }
    if (!rename.empty()) {
      out.input = substitute(rename, out.input);
      out.output = substitute(rename, out.output);
    }
    // Input binders scope over the output world.
    std::map<Name, Name> clash;
    for (auto& [x, _] : binders(out.input)) {
      if (fv_.count(x)) clash[x] = Name::fresh(x.base);
    }
    if (!clash.empty()) {
      out.input = rename_binders(out.input, clash);
      Subst s;
      for (auto& [from, to] : clash) s.terms[from] = mk::var(to);
      out.output = substitute(s, out.output);
    }
    out.input = world(out.input);
    out.output = world(out.output);
    for (auto& ws : out.weak_heap) ws.invariant = type(ws.invariant);
    return mk::arrow(std::move(out));
  }

  Ty type(const Ty& s) const {
    return std::visit(overloaded{
                          [&](const TRefine& n) -> Ty {
                            if (fv_.count(n.binder)) {
                              Name y = Name::fresh(n.binder.base);
                              return mk::refine(y, form(substitute(Subst{}.with(n.binder, mk::var(y)), n.pred)));
                            }
                            return mk::refine(n.binder, form(n.pred));
                          },
                          [&](const TExists& n) -> Ty {
                            Ty bound = type(n.bound);
                            if (fv_.count(n.binder)) {
                              Name y = Name::fresh(n.binder.base);
                              Ty body = substitute(Subst{}.with(n.binder, mk::var(y)), n.body);
                              return mk::exists(y, bound, type(body));
                            }
                            return mk::exists(n.binder, bound, type(n.body));
                          },
                          [&](const TExistsLoc& n) -> Ty { return mk::exists_loc(n.loc, type(n.body)); },
                      },
                      s->node);
  }

  World world(const World& w) const {
    std::map<Name, Name> clash;
    for (auto& [x, _] : binders(w)) {
      if (fv_.count(x)) clash[x] = Name::fresh(x.base);
    }
    World src = clash.empty() ? w : rename_binders(w, clash);
    return World{src.binder, type(src.type), heap_body(src.heap)};
  }

  HeapType heap(const HeapType& h) const {
    std::map<Name, Name> clash;
    for (auto& [x, _] : binders(h)) {
      if (fv_.count(x)) clash[x] = Name::fresh(x.base);
    }
    return heap_body(clash.empty() ? h : rename_binders(h, clash));
  }

 private:
  HeapType heap_body(const HeapType& h) const {
    HeapType out{h.deep, {}};
    for (auto& b : h.bindings) {
      if (auto* hb = std::get_if<HBind>(&b)) {
        out.bindings.push_back(HBind{hb->loc, hb->binder, type(hb->type), hb->proto});
      } else {
        out.bindings.push_back(b);
      }
    }
    return out;
  }

  Name a_;
  Name binder_;
  Form pred_;
  std::set<Name> fv_;
  std::set<Name> ftv_;
};

}  // namespace

Form tinst(const Form& p, const Name& a, const Ty& t) { return Instantiator(a, t).form(p); }
Ty tinst(const Ty& s, const Name& a, const Ty& t) { return Instantiator(a, t).type(s); }
World tinst(const World& w, const Name& a, const Ty& t) { return Instantiator(a, t).world(w); }
HeapType tinst(const HeapType& h, const Name& a, const Ty& t) { return Instantiator(a, t).heap(h); }

}  // namespace dimp
