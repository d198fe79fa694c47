#include "dimp/subst.hpp"

#include <algorithm>
#include <memory>

#include "dimp/printer.hpp"

namespace dimp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---------------------------------------------------------------------------
// Free variables

void fv(const Walk& w, std::set<Name>& out);
void fv(const Form& p, std::set<Name>& out);
void fv(const Ty& t, std::set<Name>& out);
void fv(const Term& u, std::set<Name>& out);
void fv(const World& w, std::set<Name>& out);
void fv_heap_body(const HeapType& h, std::set<Name>& out);

void fv(const Walk& w, std::set<Name>& out) {
  std::visit(overloaded{
                 [&](const WVar& n) { out.insert(n.name); },
                 [&](const WConst&) {},
                 [&](const WLoc&) {},
                 [&](const WExtend& n) {
                   fv(n.dict, out);
                   fv(n.key, out);
                   fv(n.val, out);
                 },
                 [&](const WTuple& n) {
                   for (auto& i : n.items) fv(i, out);
                 },
                 [&](const WFun&) {},
                 [&](const WApp& n) {
                   for (auto& i : n.args) fv(i, out);
                 },
             },
             w->node);
}

void fv(const Form& p, std::set<Name>& out) {
  std::visit(overloaded{
                 [&](const FTrue&) {},
                 [&](const FFalse&) {},
                 [&](const FEq& n) {
                   fv(n.lhs, out);
                   fv(n.rhs, out);
                 },
                 [&](const FPred& n) {
                   for (auto& a : n.args) fv(a, out);
                 },
                 [&](const FHasTyp& n) {
                   fv(n.term, out);
                   fv(n.type, out);
                 },
                 [&](const FHeapHas& n) { fv(n.term, out); },
                 [&](const FAnd& n) {
                   for (auto& i : n.items) fv(i, out);
                 },
                 [&](const FOr& n) {
                   for (auto& i : n.items) fv(i, out);
                 },
                 [&](const FNot& n) { fv(n.body, out); },
                 [&](const FImplies& n) {
                   fv(n.lhs, out);
                   fv(n.rhs, out);
                 },
                 [&](const FIte& n) {
                   fv(n.cond, out);
                   fv(n.then_f, out);
                   fv(n.else_f, out);
                 },
             },
             p->node);
}

void fv(const Ty& t, std::set<Name>& out) {
  std::visit(overloaded{
                 [&](const TRefine& n) {
                   std::set<Name> inner;
                   fv(n.pred, inner);
                   inner.erase(n.binder);
                   out.insert(inner.begin(), inner.end());
                 },
                 [&](const TExists& n) {
                   fv(n.bound, out);
                   std::set<Name> inner;
                   fv(n.body, inner);
                   inner.erase(n.binder);
                   out.insert(inner.begin(), inner.end());
                 },
                 [&](const TExistsLoc& n) { fv(n.body, out); },
             },
             t->node);
}

void fv_heap_body(const HeapType& h, std::set<Name>& out) {
  for (auto& b : h.bindings) {
    if (auto* hb = std::get_if<HBind>(&b)) fv(hb->type, out);
  }
}

void fv(const World& w, std::set<Name>& out) {
  fv(w.type, out);
  std::set<Name> inner;
  fv_heap_body(w.heap, inner);
  for (auto& [x, _] : binders(w)) inner.erase(x);
  out.insert(inner.begin(), inner.end());
}

void fv(const Term& u, std::set<Name>& out) {
  std::visit(overloaded{
                 [&](const UArrow& a) {
                   fv(a.input, out);
                   std::set<Name> inner;
                   fv(a.output, inner);
                   for (auto& [x, _] : binders(a.input)) inner.erase(x);
                   out.insert(inner.begin(), inner.end());
                   for (auto& ws : a.weak_heap) fv(ws.invariant, out);
                 },
                 [&](const UTyVar&) {},
                 [&](const UArray& n) { fv(n.elem, out); },
                 [&](const URef&) {},
                 [&](const UNull&) {},
             },
             u->node);
}

// ---------------------------------------------------------------------------
// Substitution

class Applier {
 public:
  explicit Applier(Subst s, int* canon = nullptr) : s_(std::move(s)), canon_(canon) {
    for (auto& [_, w] : s_.terms) fv(w, range_vars_);
    for (auto& [_, l] : s_.locs) range_locs_.insert(l);
    for (auto& [_, n] : s_.tyvars) range_names_.insert(n);
    for (auto& [_, n] : s_.heapvars) range_names_.insert(n);
  }

  bool trivial() const { return s_.empty() && canon_ == nullptr; }

  Walk walk(const Walk& w) const {
    if (s_.terms.empty()) return w;
    return std::visit(
        overloaded{
            [&](const WVar& n) -> Walk {
              auto it = s_.terms.find(n.name);
              return it == s_.terms.end() ? w : it->second;
            },
            [&](const WConst&) -> Walk { return w; },
            [&](const WLoc&) -> Walk { return w; },
            [&](const WExtend& n) -> Walk { return mk::extend(walk(n.dict), walk(n.key), walk(n.val)); },
            [&](const WTuple& n) -> Walk {
              std::vector<Walk> items;
              for (auto& i : n.items) items.push_back(walk(i));
              return mk::tuple(std::move(items));
            },
            [&](const WFun&) -> Walk { return w; },
            [&](const WApp& n) -> Walk {
              std::vector<Walk> args;
              for (auto& i : n.args) args.push_back(walk(i));
              return mk::app(n.fn, std::move(args));
            },
        },
        w->node);
  }

  Location loc(const Location& l) const {
    auto it = s_.locs.find(l);
    return it == s_.locs.end() ? l : it->second;
  }

  Name heapvar(const Name& h) const {
    auto it = s_.heapvars.find(h);
    return it == s_.heapvars.end() ? h : it->second;
  }

  ThawState thaw(const ThawState& th) const {
    if (th.frozen()) return th;
    return ThawState::thwd(loc(*th.thawed));
  }

  Form form(const Form& p) const {
    if (trivial()) return p;
    return std::visit(
        overloaded{
            [&](const FTrue&) -> Form { return p; },
            [&](const FFalse&) -> Form { return p; },
            [&](const FEq& n) -> Form { return mk::eq(walk(n.lhs), walk(n.rhs)); },
            [&](const FPred& n) -> Form {
              std::vector<Walk> args;
              for (auto& a : n.args) args.push_back(walk(a));
              return mk::pred(n.name, std::move(args));
            },
            [&](const FHasTyp& n) -> Form { return mk::has_typ(walk(n.term), term(n.type)); },
            [&](const FHeapHas& n) -> Form {
              return mk::heap_has(heapvar(n.heap), loc(n.loc), walk(n.term));
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
        },
        p->node);
  }

  Ty type(const Ty& t) const {
    if (trivial()) return t;
    return std::visit(
        overloaded{
            [&](const TRefine& n) -> Ty {
              std::set<Name> body;
              fv(n.pred, body);
              auto [inner, names] = bind({n.binder}, body);
              return mk::refine(names[0], inner.form(n.pred));
            },
            [&](const TExists& n) -> Ty {
              Ty bound = type(n.bound);
              std::set<Name> body;
              fv(n.body, body);
              auto [inner, names] = bind({n.binder}, body);
              return mk::exists(names[0], bound, inner.type(n.body));
            },
            [&](const TExistsLoc& n) -> Ty {
              auto [inner, locs] = bind_locs({n.loc});
              return mk::exists_loc(locs[0], inner.type(n.body));
            },
        },
        t->node);
  }

  Term term(const Term& u) const {
    if (trivial()) return u;
    return std::visit(
        overloaded{
            [&](const UArrow& a) -> Term {
              auto [q, tyvars, locvars, heapvars] = bind_quantifiers(a);
              UArrow out;
              out.tyvars = tyvars;
              out.locvars = locvars;
              out.heapvars = heapvars;
              for (auto& ws : a.weak_heap) {
                out.weak_heap.push_back({q.loc(ws.loc), q.type(ws.invariant), q.loc(ws.proto)});
              }
              auto [input, scope] = q.world_scope(a.input);
              out.input = std::move(input);
              out.output = scope.world(a.output);
              return mk::arrow(std::move(out));
            },
            [&](const UTyVar& n) -> Term {
              auto it = s_.tyvars.find(n.name);
              return it == s_.tyvars.end() ? u : mk::tyvar(it->second);
            },
            [&](const UArray& n) -> Term { return mk::array(type(n.elem)); },
            [&](const URef& n) -> Term { return mk::ref(loc(n.loc)); },
            [&](const UNull&) -> Term { return u; },
        },
        u->node);
  }

  World world(const World& w) const {
    if (trivial()) return w;
    return world_scope(w).first;
  }

  // Applies to a world and returns the applier for the scope its binders
  // open (used for an arrow's output world).
  std::pair<World, Applier> world_scope(const World& w) const {
    Ty t = type(w.type);
    std::vector<Name> names{w.binder};
    for (auto& b : w.heap.bindings) {
      if (auto* hb = std::get_if<HBind>(&b)) names.push_back(hb->binder);
    }
    std::set<Name> body;
    fv_heap_body(w.heap, body);
    auto [inner, renamed] = bind(names, body);
    World out{renamed[0], t, inner.heap_body(w.heap, renamed, 1)};
    return {std::move(out), std::move(inner)};
  }

  HeapType heap(const HeapType& h) const {
    if (trivial()) return h;
    std::vector<Name> names;
    for (auto& b : h.bindings) {
      if (auto* hb = std::get_if<HBind>(&b)) names.push_back(hb->binder);
    }
    std::set<Name> body;
    fv_heap_body(h, body);
    auto [inner, renamed] = bind(names, body);
    return inner.heap_body(h, renamed, 0);
  }

  // Applies to bindings whose binders are already in scope; `renamed[offset+i]`
  // is the new name of the i-th binder.
  HeapType heap_body(const HeapType& h, const std::vector<Name>& renamed, std::size_t offset) const {
    HeapType out;
    out.deep = heapvar(h.deep);
    std::size_t i = offset;
    for (auto& b : h.bindings) {
      if (auto* hb = std::get_if<HBind>(&b)) {
        std::optional<Location> proto;
        if (hb->proto) proto = loc(*hb->proto);
        out.bindings.push_back(HBind{loc(hb->loc), renamed[i++], type(hb->type), proto});
      } else {
        const auto& wb = std::get<HWeak>(b);
        out.bindings.push_back(HWeak{loc(wb.loc), thaw(wb.state)});
      }
    }
    return out;
  }

  HeapEnv env(const HeapEnv& h) const {
    HeapEnv out;
    out.deep = heapvar(h.deep);
    for (auto& b : h.bindings) {
      if (auto* eb = std::get_if<EBind>(&b)) {
        std::optional<Location> proto;
        if (eb->proto) proto = loc(*eb->proto);
        out.bindings.push_back(EBind{loc(eb->loc), walk(eb->value), proto});
      } else {
        const auto& wb = std::get<HWeak>(b);
        out.bindings.push_back(HWeak{loc(wb.loc), thaw(wb.state)});
      }
    }
    return out;
  }

 private:
  Name rename_binder(const Name& x) const {
    if (canon_) return Name("%", ++*canon_);
    return Name::fresh(x.base);
  }

  // Enters the scope of value binders; renames those that would capture a
  // variable of the substitution's range.
  std::pair<Applier, std::vector<Name>> bind(const std::vector<Name>& names,
                                             const std::set<Name>& body_fv) const {
    Applier inner = *this;
    std::vector<Name> out;
    bool relevant_capture = false;
    for (const auto& x : names) {
      if (canon_ == nullptr && range_vars_.count(x)) {
        for (auto& [k, w] : s_.terms) {
          if (body_fv.count(k) && !std::count(names.begin(), names.end(), k)) {
            std::set<Name> r;
            fv(w, r);
            if (r.count(x)) relevant_capture = true;
          }
        }
      }
    }
    for (const auto& x : names) {
      bool rename = canon_ != nullptr || (relevant_capture && range_vars_.count(x));
      if (rename) {
        Name y = rename_binder(x);
        inner.s_.terms[x] = mk::var(y);
        inner.range_vars_.insert(y);
        out.push_back(y);
      } else {
        inner.s_.terms.erase(x);
        out.push_back(x);
      }
    }
    return {std::move(inner), std::move(out)};
  }

  std::pair<Applier, std::vector<Location>> bind_locs(const std::vector<Location>& locs) const {
    Applier inner = *this;
    std::vector<Location> out;
    for (const auto& l : locs) {
      if (canon_ != nullptr || range_locs_.count(l)) {
        Location fresh = l;
        fresh.name = canon_ ? Name("%", ++*canon_) : Name::fresh(l.name.base);
        inner.s_.locs[l] = fresh;
        inner.range_locs_.insert(fresh);
        out.push_back(fresh);
      } else {
        inner.s_.locs.erase(l);
        out.push_back(l);
      }
    }
    return {std::move(inner), std::move(out)};
  }

  std::tuple<Applier, std::vector<Name>, std::vector<Location>, std::vector<Name>> bind_quantifiers(
      const UArrow& a) const {
    auto [inner, locvars] = bind_locs(a.locvars);
    std::vector<Name> tyvars, heapvars;
    for (auto& t : a.tyvars) {
      if (canon_ != nullptr || inner.range_names_.count(t)) {
        Name y = canon_ ? Name("%", ++*canon_) : Name::fresh(t.base);
        inner.s_.tyvars[t] = y;
        tyvars.push_back(y);
      } else {
        inner.s_.tyvars.erase(t);
        tyvars.push_back(t);
      }
    }
    for (auto& h : a.heapvars) {
      if (canon_ != nullptr || inner.range_names_.count(h)) {
        Name y = canon_ ? Name("%", ++*canon_) : Name::fresh(h.base);
        inner.s_.heapvars[h] = y;
        heapvars.push_back(y);
      } else {
        inner.s_.heapvars.erase(h);
        heapvars.push_back(h);
      }
    }
    return {std::move(inner), std::move(tyvars), std::move(locvars), std::move(heapvars)};
  }

  Subst s_;
  int* canon_;
  std::set<Name> range_vars_;
  std::set<Location> range_locs_;
  std::set<Name> range_names_;
};

// ---------------------------------------------------------------------------

void flocs(const Ty& t, std::set<Location>& out);
void flocs(const Form& p, std::set<Location>& out);
void flocs(const HeapType& h, std::set<Location>& out);

void flocs(const Term& u, std::set<Location>& out) {
  std::visit(overloaded{
                 [&](const UArrow& a) {
                   std::set<Location> inner;
                   flocs(a.input.type, inner);
                   flocs(a.input.heap, inner);
                   flocs(a.output.type, inner);
                   flocs(a.output.heap, inner);
                   for (auto& l : a.locvars) inner.erase(l);
                   out.insert(inner.begin(), inner.end());
                 },
                 [&](const UTyVar&) {},
                 [&](const UArray& n) { flocs(n.elem, out); },
                 [&](const URef& n) { out.insert(n.loc); },
                 [&](const UNull&) {},
             },
             u->node);
}

void flocs(const Form& p, std::set<Location>& out) {
  std::visit(overloaded{
                 [&](const FHasTyp& n) { flocs(n.type, out); },
                 [&](const FHeapHas& n) { out.insert(n.loc); },
                 [&](const FAnd& n) {
                   for (auto& i : n.items) flocs(i, out);
                 },
                 [&](const FOr& n) {
                   for (auto& i : n.items) flocs(i, out);
                 },
                 [&](const FNot& n) { flocs(n.body, out); },
                 [&](const FImplies& n) {
                   flocs(n.lhs, out);
                   flocs(n.rhs, out);
                 },
                 [&](const FIte& n) {
                   flocs(n.cond, out);
                   flocs(n.then_f, out);
                   flocs(n.else_f, out);
                 },
                 [&](const auto&) {},
             },
             p->node);
}

void flocs(const Ty& t, std::set<Location>& out) {
  std::visit(overloaded{
                 [&](const TRefine& n) { flocs(n.pred, out); },
                 [&](const TExists& n) {
                   flocs(n.bound, out);
                   flocs(n.body, out);
                 },
                 [&](const TExistsLoc& n) {
                   std::set<Location> inner;
                   flocs(n.body, inner);
                   inner.erase(n.loc);
                   out.insert(inner.begin(), inner.end());
                 },
             },
             t->node);
}

void flocs(const HeapType& h, std::set<Location>& out) {
  for (auto& b : h.bindings) {
    if (auto* hb = std::get_if<HBind>(&b)) {
      out.insert(hb->loc);
      if (hb->proto) out.insert(*hb->proto);
      flocs(hb->type, out);
    } else {
      const auto& wb = std::get<HWeak>(b);
      out.insert(wb.loc);
      if (wb.state.thawed) out.insert(*wb.state.thawed);
    }
  }
}

void ftv(const Form& p, std::set<Name>& out, bool heaps);

void ftv(const Ty& t, std::set<Name>& out, bool heaps) {
  std::visit(overloaded{
                 [&](const TRefine& n) { ftv(n.pred, out, heaps); },
                 [&](const TExists& n) {
                   ftv(n.bound, out, heaps);
                   ftv(n.body, out, heaps);
                 },
                 [&](const TExistsLoc& n) { ftv(n.body, out, heaps); },
             },
             t->node);
}

void ftv(const HeapType& h, std::set<Name>& out, bool heaps) {
  if (heaps) out.insert(h.deep);
  for (auto& b : h.bindings) {
    if (auto* hb = std::get_if<HBind>(&b)) ftv(hb->type, out, heaps);
  }
}

void ftv(const Term& u, std::set<Name>& out, bool heaps) {
  std::visit(overloaded{
                 [&](const UArrow& a) {
                   std::set<Name> inner;
                   ftv(a.input.type, inner, heaps);
                   ftv(a.input.heap, inner, heaps);
                   ftv(a.output.type, inner, heaps);
                   ftv(a.output.heap, inner, heaps);
                   for (auto& n : heaps ? a.heapvars : a.tyvars) inner.erase(n);
                   out.insert(inner.begin(), inner.end());
                 },
                 [&](const UTyVar& n) {
                   if (!heaps) out.insert(n.name);
                 },
                 [&](const UArray& n) { ftv(n.elem, out, heaps); },
                 [&](const auto&) {},
             },
             u->node);
}

void ftv(const Form& p, std::set<Name>& out, bool heaps) {
  std::visit(overloaded{
                 [&](const FHasTyp& n) { ftv(n.type, out, heaps); },
                 [&](const FHeapHas& n) {
                   if (heaps) out.insert(n.heap);
                 },
                 [&](const FAnd& n) {
                   for (auto& i : n.items) ftv(i, out, heaps);
                 },
                 [&](const FOr& n) {
                   for (auto& i : n.items) ftv(i, out, heaps);
                 },
                 [&](const FNot& n) { ftv(n.body, out, heaps); },
                 [&](const FImplies& n) {
                   ftv(n.lhs, out, heaps);
                   ftv(n.rhs, out, heaps);
                 },
                 [&](const FIte& n) {
                   ftv(n.cond, out, heaps);
                   ftv(n.then_f, out, heaps);
                   ftv(n.else_f, out, heaps);
                 },
                 [&](const auto&) {},
             },
             p->node);
}

}  // namespace

Subst Subst::with(const Name& x, Walk w) const {
  Subst s = *this;
  s.terms[x] = std::move(w);
  return s;
}

Subst Subst::with_loc(const Location& from, const Location& to) const {
  Subst s = *this;
  s.locs[from] = to;
  return s;
}

Subst compose(const Subst& outer, const Subst& inner) {
  Subst out;
  Applier a(outer);
  for (auto& [k, w] : inner.terms) out.terms[k] = a.walk(w);
  for (auto& [k, w] : outer.terms) out.terms.emplace(k, w);
  for (auto& [k, l] : inner.locs) out.locs[k] = a.loc(l);
  for (auto& [k, l] : outer.locs) out.locs.emplace(k, l);
  for (auto& [k, n] : inner.tyvars) {
    auto it = outer.tyvars.find(n);
    out.tyvars[k] = it == outer.tyvars.end() ? n : it->second;
  }
  for (auto& [k, n] : outer.tyvars) out.tyvars.emplace(k, n);
  for (auto& [k, n] : inner.heapvars) out.heapvars[k] = a.heapvar(n);
  for (auto& [k, n] : outer.heapvars) out.heapvars.emplace(k, n);
  return out;
}

Walk substitute(const Subst& s, const Walk& w) { return Applier(s).walk(w); }
Form substitute(const Subst& s, const Form& p) { return Applier(s).form(p); }
Term substitute(const Subst& s, const Term& u) { return Applier(s).term(u); }
Ty substitute(const Subst& s, const Ty& t) { return Applier(s).type(t); }
World substitute(const Subst& s, const World& w) { return Applier(s).world(w); }
HeapType substitute(const Subst& s, const HeapType& h) { return Applier(s).heap(h); }
HeapEnv substitute(const Subst& s, const HeapEnv& h) { return Applier(s).env(h); }

HeapType rename_binders(const HeapType& h, const std::map<Name, Name>& renaming) {
  Subst s;
  for (auto& [from, to] : renaming) s.terms[from] = mk::var(to);
  Applier a(s);
  HeapType out;
  out.deep = h.deep;
  for (auto& b : h.bindings) {
    if (auto* hb = std::get_if<HBind>(&b)) {
      auto it = renaming.find(hb->binder);
      Name binder = it == renaming.end() ? hb->binder : it->second;
      out.bindings.push_back(HBind{hb->loc, binder, a.type(hb->type), hb->proto});
    } else {
      out.bindings.push_back(b);
    }
  }
  return out;
}

World rename_binders(const World& w, const std::map<Name, Name>& renaming) {
  auto it = renaming.find(w.binder);
  Name binder = it == renaming.end() ? w.binder : it->second;
  // The value type is outside the world's own scope.
  return World{binder, w.type, rename_binders(w.heap, renaming)};
}

std::set<Name> free_vars(const Walk& w) {
  std::set<Name> out;
  fv(w, out);
  return out;
}
std::set<Name> free_vars(const Form& p) {
  std::set<Name> out;
  fv(p, out);
  return out;
}
std::set<Name> free_vars(const Ty& t) {
  std::set<Name> out;
  fv(t, out);
  return out;
}
std::set<Name> free_vars(const Term& u) {
  std::set<Name> out;
  fv(u, out);
  return out;
}
std::set<Name> free_vars(const World& w) {
  std::set<Name> out;
  fv(w, out);
  return out;
}
std::set<Name> free_vars(const HeapType& h) {
  std::set<Name> out;
  fv_heap_body(h, out);
  for (auto& [x, _] : binders(h)) out.erase(x);
  return out;
}
void free_vars_into(const Walk& w, std::set<Name>& out) { fv(w, out); }
void free_vars_into(const Form& p, std::set<Name>& out) { fv(p, out); }
void free_vars_into(const Ty& t, std::set<Name>& out) { fv(t, out); }

std::set<Location> free_locs(const Ty& t) {
  std::set<Location> out;
  flocs(t, out);
  return out;
}
std::set<Location> free_locs(const HeapType& h) {
  std::set<Location> out;
  flocs(h, out);
  return out;
}

std::set<Name> free_tyvars(const Form& p) {
  std::set<Name> out;
  ftv(p, out, false);
  return out;
}
std::set<Name> free_heapvars(const Form& p) {
  std::set<Name> out;
  ftv(p, out, true);
  return out;
}

std::string canonical(const Term& u) {
  int counter = 0;
  Applier a(Subst{}, &counter);
  return to_string(a.term(u));
}

std::string canonical(const Ty& t) {
  int counter = 0;
  Applier a(Subst{}, &counter);
  return to_string(a.type(t));
}

std::string canonical(const World& w) {
  int counter = 0;
  Applier a(Subst{}, &counter);
  return to_string(a.world(w));
}

bool alpha_equal(const Term& a, const Term& b) { return canonical(a) == canonical(b); }
bool alpha_equal(const Ty& a, const Ty& b) { return canonical(a) == canonical(b); }

}  // namespace dimp
