#include "dimp/printer.hpp"

namespace dimp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

SExpr atom(const char* s) { return SExpr::atom(s); }
SExpr atom(const std::string& s) { return SExpr::atom(s); }
SExpr atom(const Name& n) { return SExpr::atom(n.str()); }
SExpr atom(const Location& l) { return SExpr::atom(l.str()); }

SExpr form(std::string head, std::vector<SExpr> rest) {
  rest.insert(rest.begin(), SExpr::atom(std::move(head)));
  return SExpr::list(std::move(rest));
}

SExpr constant(const Constant& c) {
  switch (c.kind) {
    case Constant::Kind::Int: return atom(std::to_string(c.i));
    case Constant::Kind::Str: return SExpr::string(c.s);
    case Constant::Kind::Bool: return atom(c.b ? "true" : "false");
    case Constant::Kind::Null: return atom("null");
    case Constant::Kind::Undefined: return atom("undefined");
    case Constant::Kind::EmptyDict: return atom("emptydict");
  }
  return atom("?");
}

SExpr thaw_state(const ThawState& th) {
  if (th.frozen()) return atom("frzn");
  return form("thwd", {atom(*th.thawed)});
}

SExpr names(const std::vector<Name>& ns) {
  std::vector<SExpr> items;
  for (auto& n : ns) items.push_back(atom(n));
  return SExpr::list(std::move(items));
}

}  // namespace

SExpr to_sexpr(const Walk& w) {
  return std::visit(overloaded{
                        [](const WVar& n) { return atom(n.name); },
                        [](const WConst& n) { return constant(n.value); },
                        [](const WLoc& n) { return form("loc", {atom(n.loc)}); },
                        [](const WExtend& n) {
                          return form("upd", {to_sexpr(n.dict), to_sexpr(n.key), to_sexpr(n.val)});
                        },
                        [](const WTuple& n) {
                          std::vector<SExpr> items;
                          for (auto& i : n.items) items.push_back(to_sexpr(i));
                          return form("tuple", std::move(items));
                        },
                        [](const WFun& n) { return to_sexpr(n.fn); },
                        [](const WApp& n) {
                          std::vector<SExpr> items;
                          for (auto& i : n.args) items.push_back(to_sexpr(i));
                          return form(n.fn, std::move(items));
                        },
                    },
                    w->node);
}

SExpr to_sexpr(const Form& p) {
  return std::visit(
      overloaded{
          [](const FTrue&) { return atom("true"); },
          [](const FFalse&) { return atom("false"); },
          [](const FEq& n) { return form("=", {to_sexpr(n.lhs), to_sexpr(n.rhs)}); },
          [](const FPred& n) {
            std::vector<SExpr> items;
            for (auto& a : n.args) items.push_back(to_sexpr(a));
            return form(n.name, std::move(items));
          },
          [](const FHasTyp& n) { return form("::", {to_sexpr(n.term), to_sexpr(n.type)}); },
          [](const FHeapHas& n) {
            return form("heap-has", {atom(n.heap), atom(n.loc), to_sexpr(n.term)});
          },
          [](const FAnd& n) {
            std::vector<SExpr> items;
            for (auto& i : n.items) items.push_back(to_sexpr(i));
            return form("and", std::move(items));
          },
          [](const FOr& n) {
            std::vector<SExpr> items;
            for (auto& i : n.items) items.push_back(to_sexpr(i));
            return form("or", std::move(items));
          },
          [](const FNot& n) {
            if (auto* eq = std::get_if<FEq>(&n.body->node)) {
              return form("!=", {to_sexpr(eq->lhs), to_sexpr(eq->rhs)});
            }
            return form("not", {to_sexpr(n.body)});
          },
          [](const FImplies& n) { return form("=>", {to_sexpr(n.lhs), to_sexpr(n.rhs)}); },
          [](const FIte& n) {
            return form("ite", {to_sexpr(n.cond), to_sexpr(n.then_f), to_sexpr(n.else_f)});
          },
      },
      p->node);
}

SExpr to_sexpr(const Term& u) {
  return std::visit(overloaded{
                        [](const UArrow& a) {
                          std::vector<SExpr> items{names(a.tyvars)};
                          std::vector<SExpr> locs;
                          for (auto& l : a.locvars) locs.push_back(atom(l));
                          items.push_back(SExpr::list(std::move(locs)));
                          items.push_back(names(a.heapvars));
                          if (!a.weak_heap.empty()) {
                            std::vector<SExpr> psi;
                            for (auto& ws : a.weak_heap) {
                              psi.push_back(SExpr::list(
                                  {atom(ws.loc), to_sexpr(ws.invariant), atom(ws.proto)}));
                            }
                            items.push_back(form("psi", std::move(psi)));
                          }
                          items.push_back(to_sexpr(a.input));
                          items.push_back(to_sexpr(a.output));
                          return form("->", std::move(items));
                        },
                        [](const UTyVar& n) { return atom(n.name); },
                        [](const UArray& n) { return form("Array", {to_sexpr(n.elem)}); },
                        [](const URef& n) { return form("Ref", {atom(n.loc)}); },
                        [](const UNull&) { return atom("Null"); },
                    },
                    u->node);
}

SExpr to_sexpr(const Ty& t) {
  return std::visit(overloaded{
                        [](const TRefine& n) {
                          return SExpr::list({atom(n.binder), atom("|"), to_sexpr(n.pred)}, '{');
                        },
                        [](const TExists& n) {
                          return form("exists", {atom(n.binder), to_sexpr(n.bound), to_sexpr(n.body)});
                        },
                        [](const TExistsLoc& n) {
                          return form("exists-loc", {atom(n.loc), to_sexpr(n.body)});
                        },
                    },
                    t->node);
}

SExpr to_sexpr(const HeapType& h) {
  std::vector<SExpr> items{atom(h.deep)};
  for (auto& b : h.bindings) {
    if (auto* hb = std::get_if<HBind>(&b)) {
      std::vector<SExpr> bind{atom("bind"), atom(hb->loc), atom(hb->binder), to_sexpr(hb->type)};
      if (hb->proto) bind.push_back(atom(*hb->proto));
      items.push_back(SExpr::list(std::move(bind)));
    } else {
      const auto& wb = std::get<HWeak>(b);
      items.push_back(form("weak", {atom(wb.loc), thaw_state(wb.state)}));
    }
  }
  return form("heap", std::move(items));
}

SExpr to_sexpr(const World& w) {
  return form("world", {atom(w.binder), to_sexpr(w.type), to_sexpr(w.heap)});
}

SExpr to_sexpr(const HeapEnv& h) {
  std::vector<SExpr> items{atom(h.deep)};
  for (auto& b : h.bindings) {
    if (auto* eb = std::get_if<EBind>(&b)) {
      std::vector<SExpr> bind{atom("val"), atom(eb->loc), to_sexpr(eb->value)};
      if (eb->proto) bind.push_back(atom(*eb->proto));
      items.push_back(SExpr::list(std::move(bind)));
    } else {
      const auto& wb = std::get<HWeak>(b);
      items.push_back(form("weak", {atom(wb.loc), thaw_state(wb.state)}));
    }
  }
  return form("heapenv", std::move(items));
}

SExpr to_sexpr(const Val& v) {
  return std::visit(overloaded{
                        [](const VConst& n) { return constant(n.value); },
                        [](const VVar& n) { return atom(n.name); },
                        [](const VLoc& n) { return form("loc", {atom(n.loc)}); },
                        [](const VFun& n) { return form("fun", {names(n.params), to_sexpr(n.body)}); },
                        [](const VTuple& n) {
                          std::vector<SExpr> items;
                          for (auto& i : n.items) items.push_back(to_sexpr(i));
                          return form("tuple", std::move(items));
                        },
                        [](const VExtend& n) {
                          return form("extend", {to_sexpr(n.dict), to_sexpr(n.key), to_sexpr(n.val)});
                        },
                    },
                    v->node);
}

SExpr to_sexpr(const Exp& e) {
  return std::visit(
      overloaded{
          [](const EVal& n) { return to_sexpr(n.value); },
          [](const ELet& n) { return form("let", {atom(n.name), to_sexpr(n.bound), to_sexpr(n.body)}); },
          [](const EIf& n) {
            return form("if", {to_sexpr(n.cond), to_sexpr(n.then_e), to_sexpr(n.else_e)});
          },
          [](const ENewRef& n) { return form("ref", {atom(n.loc), to_sexpr(n.init)}); },
          [](const EDeref& n) { return form("deref", {to_sexpr(n.ref)}); },
          [](const ESetRef& n) { return form("setref", {to_sexpr(n.ref), to_sexpr(n.value)}); },
          [](const ENewObj& n) {
            return form("newobj", {atom(n.loc), to_sexpr(n.dict), to_sexpr(n.proto)});
          },
          [](const EApp& n) {
            if (!n.explicit_inst) return form("app", {to_sexpr(n.fn), to_sexpr(n.arg)});
            std::vector<SExpr> ts, ls, hs;
            for (auto& t : n.types) ts.push_back(to_sexpr(t));
            for (auto& l : n.locs) ls.push_back(atom(l));
            for (auto& h : n.heaps) hs.push_back(to_sexpr(h));
            SExpr inst = form("inst", {SExpr::list(std::move(ts)), SExpr::list(std::move(ls)),
                                       SExpr::list(std::move(hs))});
            return form("app", {std::move(inst), to_sexpr(n.fn), to_sexpr(n.arg)});
          },
          [](const EAs& n) { return form("as", {to_sexpr(n.body), to_sexpr(n.type)}); },
          [](const EThaw& n) { return form("thaw", {atom(n.loc), to_sexpr(n.ref)}); },
          [](const EFreeze& n) {
            return form("freeze", {atom(n.weak), thaw_state(n.state), to_sexpr(n.ref)});
          },
          [](const ELabel& n) {
            if (n.world) return form("label", {atom(n.label), to_sexpr(*n.world), to_sexpr(n.body)});
            return form("label", {atom(n.label), to_sexpr(n.body)});
          },
          [](const EBreak& n) { return form("break", {atom(n.label), to_sexpr(n.value)}); },
      },
      e->node);
}

SExpr to_sexpr(const Decl& d) {
  switch (d.kind) {
    case Decl::Kind::HeapVar: return form("heapvar", {atom(d.name)});
    case Decl::Kind::TyVar: return form("tyvar", {atom(d.name)});
    case Decl::Kind::LocVar: return form("locvar", {atom(d.loc)});
    case Decl::Kind::Assume: return form("assume", {atom(d.name), to_sexpr(d.type)});
    case Decl::Kind::Fact: return form("fact", {to_sexpr(d.fact)});
    case Decl::Kind::Weak: return form("weak", {atom(d.loc), to_sexpr(d.type), atom(d.proto)});
    case Decl::Kind::InitialHeap: return form("initial-heap", {to_sexpr(d.heap)});
    case Decl::Kind::Define:
      return form("define", {atom(d.name), to_sexpr(d.type), to_sexpr(d.body)});
  }
  return atom("?");
}

std::string to_string(const Walk& w) { return write_flat(to_sexpr(w)); }
std::string to_string(const Form& p) { return write_flat(to_sexpr(p)); }
std::string to_string(const Term& u) { return write_flat(to_sexpr(u)); }
std::string to_string(const Ty& t) { return write_flat(to_sexpr(t)); }
std::string to_string(const World& w) { return write_flat(to_sexpr(w)); }
std::string to_string(const HeapType& h) { return write_flat(to_sexpr(h)); }
std::string to_string(const HeapEnv& h) { return write_flat(to_sexpr(h)); }
std::string to_string(const Val& v) { return write_flat(to_sexpr(v)); }
std::string to_string(const Exp& e) { return write_flat(to_sexpr(e)); }

std::string to_pretty(const Exp& e, int width) { return write_pretty(to_sexpr(e), width); }

std::string to_pretty(const Program& p, int width) {
  std::string out;
  for (auto& d : p.decls) {
    out += write_pretty(to_sexpr(d), width);
    out += '\n';
  }
  return out;
}

}  // namespace dimp
