#include "dimp/rename.hpp"

#include "dimp/subst.hpp"

namespace dimp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Renamer {
 public:
  explicit Renamer(std::set<Name>& used) : used_(used) {}

  Exp expr(const Exp& e, const Subst& s) {
    Exp out = std::visit(
        overloaded{
            [&](const EVal& n) { return mk::val(value(n.value, s)); },
            [&](const ELet& n) {
              Exp bound = expr(n.bound, s);
              Subst inner = s;
              Name x = bind(n.name, inner);
              return mk::let(x, bound, expr(n.body, inner));
            },
            [&](const EIf& n) { return mk::ife(value(n.cond, s), expr(n.then_e, s), expr(n.else_e, s)); },
            [&](const ENewRef& n) { return mk::newref(n.loc, value(n.init, s)); },
            [&](const EDeref& n) { return mk::deref(value(n.ref, s)); },
            [&](const ESetRef& n) { return mk::setref(value(n.ref, s), value(n.value, s)); },
            [&](const ENewObj& n) { return mk::newobj(n.loc, value(n.dict, s), value(n.proto, s)); },
            [&](const EApp& n) {
              if (!n.explicit_inst) return mk::app(value(n.fn, s), value(n.arg, s));
              std::vector<Ty> ts;
              for (auto& t : n.types) ts.push_back(substitute(s, t));
              std::vector<HeapType> hs;
              for (auto& h : n.heaps) hs.push_back(substitute(s, h));
              return mk::app_inst(ts, n.locs, hs, value(n.fn, s), value(n.arg, s));
            },
            [&](const EAs& n) { return mk::as(expr(n.body, s), substitute(s, n.type)); },
            [&](const EThaw& n) { return mk::thaw(n.loc, value(n.ref, s)); },
            [&](const EFreeze& n) { return mk::freeze(n.weak, n.state, value(n.ref, s)); },
            [&](const ELabel& n) {
              std::optional<World> w;
              if (n.world) w = substitute(s, *n.world);
              return mk::label(n.label, w, expr(n.body, s));
            },
            [&](const EBreak& n) { return mk::brk(n.label, value(n.value, s)); },
        },
        e->node);
    std::const_pointer_cast<Expr>(out)->line = e->line;
    return out;
  }

  Val value(const Val& v, const Subst& s) {
    return std::visit(
        overloaded{
            [&](const VConst&) { return v; },
            [&](const VVar& n) {
              auto it = s.terms.find(n.name);
              if (it == s.terms.end()) return v;
              return mk::vvar(std::get<WVar>(it->second->node).name);
            },
            [&](const VLoc&) { return v; },
            [&](const VFun& n) {
              Subst inner = s;
              std::vector<Name> ps;
              for (auto& p : n.params) ps.push_back(bind(p, inner));
              return mk::vfun(ps, expr(n.body, inner));
            },
            [&](const VTuple& n) {
              std::vector<Val> items;
              for (auto& i : n.items) items.push_back(value(i, s));
              return mk::vtuple(items);
            },
            [&](const VExtend& n) { return mk::vextend(value(n.dict, s), value(n.key, s), value(n.val, s)); },
        },
        v->node);
  }

 private:
  Name bind(const Name& x, Subst& s) {
    if (x.stamp > 0) Name::reserve(x.stamp);
    Name y = x;
    if (used_.count(x) || x == Name("_")) y = Name::fresh(x.base);
    used_.insert(y);
    if (y != x) {
      s.terms[x] = mk::var(y);
    } else {
      s.terms.erase(x);
    }
    return y;
  }

  std::set<Name>& used_;
};

}  // namespace

Exp rename_binders(const Exp& e, std::set<Name>& used) {
  Renamer r(used);
  return r.expr(e, Subst{});
}

Program rename_program(const Program& p) {
  std::set<Name> used;
  for (auto& d : p.decls) {
    if (d.kind == Decl::Kind::Assume || d.kind == Decl::Kind::Define) used.insert(d.name);
    if (d.kind == Decl::Kind::InitialHeap) {
      for (auto& [x, _] : binders(d.heap)) used.insert(x);
    }
  }
  Program out = p;
  for (auto& d : out.decls) {
    if (d.kind == Decl::Kind::Define) d.body = rename_binders(d.body, used);
  }
  return out;
}

}  // namespace dimp
