#include "dimp/syntax.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <set>

#include "dimp/error.hpp"
#include "dimp/subst.hpp"

namespace dimp {

namespace {

// Stamps below the floor may appear in parsed source; fresh names start above.
std::atomic<int> g_stamp_floor{0};
thread_local int t_next_stamp = 0;

int next_stamp() {
  int floor = g_stamp_floor.load();
  if (t_next_stamp <= floor) t_next_stamp = floor + 1;
  return t_next_stamp++;
}

}  // namespace

std::string Name::str() const {
  if (stamp == 0) return base;
  return base + "$" + std::to_string(stamp);
}

Name Name::fresh(std::string_view base) {
  std::string b(base);
  return Name(std::move(b), next_stamp());
}

void Name::reserve(int stamp) {
  int cur = g_stamp_floor.load();
  while (stamp > cur && !g_stamp_floor.compare_exchange_weak(cur, stamp)) {
  }
}

FreshScope::FreshScope() : saved_(t_next_stamp) { t_next_stamp = 0; }
FreshScope::~FreshScope() { t_next_stamp = saved_; }

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Wf: return "wf";
    case ErrorKind::Type: return "type";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Unsupported: return "unsupported";
  }
  return "?";
}

std::string Error::render() const {
  std::string out = std::string(to_string(kind_)) + " error";
  if (line_ > 0) out += " at line " + std::to_string(line_);
  out += ": " + message_;
  for (const auto& n : notes_) out += "\n    " + n;
  if (!trace_.empty()) {
    out += "\n    in";
    for (const auto& t : trace_) out += " " + t;
  }
  return out;
}

void fail(ErrorKind kind, std::string message, int line) {
  throw Error(kind, std::move(message), line);
}

// ---------------------------------------------------------------------------

std::string Location::str() const {
  if (is_weak()) return "~" + name.str();
  if (kind == Kind::RunTime) return "#" + name.str();
  return name.str();
}

Location Location::strong(Name n) { return {Kind::StrongConst, std::move(n)}; }
Location Location::weak(Name n) { return {Kind::WeakConst, std::move(n)}; }
Location Location::var(Name n) { return {Kind::StrongVar, std::move(n)}; }
Location Location::runtime(Name n) { return {Kind::RunTime, std::move(n)}; }

Location Location::parse(std::string_view text) {
  bool weak = !text.empty() && text.front() == '~';
  if (weak) text.remove_prefix(1);
  Name n{std::string(text)};
  auto dollar = n.base.find('$');
  if (dollar != std::string::npos && dollar + 1 < n.base.size()) {
    n.stamp = std::stoi(n.base.substr(dollar + 1));
    n.base.resize(dollar);
    Name::reserve(n.stamp);
  }
  bool upper = !n.base.empty() && std::isupper(static_cast<unsigned char>(n.base.front()));
  if (weak) return {upper ? Kind::WeakVar : Kind::WeakConst, std::move(n)};
  return {upper ? Kind::StrongVar : Kind::StrongConst, std::move(n)};
}

std::string Constant::str() const {
  switch (kind) {
    case Kind::Int: return std::to_string(i);
    case Kind::Str: {
      std::string out = "\"";
      for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      return out + "\"";
    }
    case Kind::Bool: return b ? "true" : "false";
    case Kind::Null: return "null";
    case Kind::Undefined: return "undefined";
    case Kind::EmptyDict: return "emptydict";
  }
  return "?";
}

std::string ThawState::str() const {
  if (frozen()) return "frzn";
  return "(thwd " + thawed->str() + ")";
}

// ---------------------------------------------------------------------------

namespace mk {

namespace {
Walk w(decltype(Walkable::node) n) { return std::make_shared<const Walkable>(Walkable{std::move(n)}); }
Form f(decltype(Formula::node) n) { return std::make_shared<const Formula>(Formula{std::move(n)}); }
Term u(decltype(TypeTerm::node) n) { return std::make_shared<const TypeTerm>(TypeTerm{std::move(n)}); }
Ty t(decltype(Type::node) n) { return std::make_shared<const Type>(Type{std::move(n)}); }
Val v(decltype(Value::node) n) { return std::make_shared<const Value>(Value{std::move(n)}); }
Exp e(decltype(Expr::node) n, int line) {
  return std::make_shared<const Expr>(Expr{std::move(n), line});
}
}  // namespace

Walk var(Name n) { return w(WVar{std::move(n)}); }
Walk cint(std::int64_t x) { return w(WConst{Constant::integer(x)}); }
Walk cstr(std::string s) { return w(WConst{Constant::string(std::move(s))}); }
Walk cbool(bool b) { return w(WConst{Constant::boolean(b)}); }
Walk null() { return w(WConst{Constant::null()}); }
Walk undefined() { return w(WConst{Constant::undefined()}); }
Walk empty_dict() { return w(WConst{Constant::empty_dict()}); }
Walk konst(Constant c) { return w(WConst{std::move(c)}); }
Walk loc(Location l) { return w(WLoc{std::move(l)}); }
Walk extend(Walk d, Walk k, Walk val) { return w(WExtend{std::move(d), std::move(k), std::move(val)}); }
Walk tuple(std::vector<Walk> items) { return w(WTuple{std::move(items)}); }
Walk fun(Val lambda) { return w(WFun{std::move(lambda)}); }
Walk app(std::string fn, std::vector<Walk> args) { return w(WApp{std::move(fn), std::move(args)}); }
Walk sel(Walk d, Walk k) { return app("sel", {std::move(d), std::move(k)}); }

Form tru() {
  static const Form p = f(FTrue{});
  return p;
}
Form fls() {
  static const Form p = f(FFalse{});
  return p;
}
Form eq(Walk a, Walk b) { return f(FEq{std::move(a), std::move(b)}); }
Form neq(Walk a, Walk b) { return neg(eq(std::move(a), std::move(b))); }
Form pred(std::string name, std::vector<Walk> args) { return f(FPred{std::move(name), std::move(args)}); }
Form has_typ(Walk x, Term ty) { return f(FHasTyp{std::move(x), std::move(ty)}); }
Form heap_has(Name h, Location l, Walk x) { return f(FHeapHas{std::move(h), std::move(l), std::move(x)}); }

Form conj(std::vector<Form> items) {
  std::vector<Form> flat;
  for (auto& p : items) {
    if (std::holds_alternative<FTrue>(p->node)) continue;
    if (auto* a = std::get_if<FAnd>(&p->node)) {
      for (auto& q : a->items) flat.push_back(q);
    } else {
      flat.push_back(p);
    }
  }
  if (flat.empty()) return tru();
  if (flat.size() == 1) return flat.front();
  return f(FAnd{std::move(flat)});
}

Form disj(std::vector<Form> items) {
  if (items.empty()) return fls();
  if (items.size() == 1) return items.front();
  return f(FOr{std::move(items)});
}

Form neg(Form p) { return f(FNot{std::move(p)}); }
Form implies(Form a, Form b) { return f(FImplies{std::move(a), std::move(b)}); }
Form ite(Form c, Form a, Form b) { return f(FIte{std::move(c), std::move(a), std::move(b)}); }

Term arrow(UArrow a) { return u(std::move(a)); }
Term tyvar(Name n) { return u(UTyVar{std::move(n)}); }
Term array(Ty elem) { return u(UArray{std::move(elem)}); }
Term ref(Location l) { return u(URef{std::move(l)}); }
Term null_term() { return u(UNull{}); }

Ty refine(Name binder, Form p) { return t(TRefine{std::move(binder), std::move(p)}); }
Ty top() { return refine("v", tru()); }
Ty bottom() { return refine("v", fls()); }
Ty exists(Name binder, Ty bound, Ty body) {
  return t(TExists{std::move(binder), std::move(bound), std::move(body)});
}
Ty exists_loc(Location l, Ty body) { return t(TExistsLoc{std::move(l), std::move(body)}); }
Ty ref_type(Location l) { return refine("v", has_typ(var("v"), ref(std::move(l)))); }
Ty singleton(Walk x) {
  auto used = free_vars(x);
  Name b("v");
  for (int k = 1; used.count(b); ++k) b = Name("v" + std::to_string(k));
  return refine(b, eq(var(b), std::move(x)));
}

Val vconst(Constant c) { return v(VConst{std::move(c)}); }
Val vvar(Name n) { return v(VVar{std::move(n)}); }
Val vloc(Location l) { return v(VLoc{std::move(l)}); }
Val vfun(std::vector<Name> params, Exp body) { return v(VFun{std::move(params), std::move(body)}); }
Val vtuple(std::vector<Val> items) { return v(VTuple{std::move(items)}); }
Val vextend(Val d, Val k, Val x) { return v(VExtend{std::move(d), std::move(k), std::move(x)}); }

Exp val(Val x, int line) { return e(EVal{std::move(x)}, line); }
Exp let(Name x, Exp bound, Exp body, int line) {
  return e(ELet{std::move(x), std::move(bound), std::move(body)}, line);
}
Exp ife(Val c, Exp a, Exp b, int line) { return e(EIf{std::move(c), std::move(a), std::move(b)}, line); }
Exp newref(Location l, Val x, int line) { return e(ENewRef{std::move(l), std::move(x)}, line); }
Exp deref(Val x, int line) { return e(EDeref{std::move(x)}, line); }
Exp setref(Val r, Val x, int line) { return e(ESetRef{std::move(r), std::move(x)}, line); }
Exp newobj(Location l, Val d, Val p, int line) {
  return e(ENewObj{std::move(l), std::move(d), std::move(p)}, line);
}
Exp app(Val fn, Val a, int line) { return e(EApp{{}, {}, {}, false, std::move(fn), std::move(a)}, line); }
Exp app_inst(std::vector<Ty> ts, std::vector<Location> ls, std::vector<HeapType> hs, Val fn, Val a,
             int line) {
  return e(EApp{std::move(ts), std::move(ls), std::move(hs), true, std::move(fn), std::move(a)}, line);
}
Exp as(Exp body, Ty ty, int line) { return e(EAs{std::move(body), std::move(ty)}, line); }
Exp thaw(Location l, Val x, int line) { return e(EThaw{std::move(l), std::move(x)}, line); }
Exp freeze(Location weak, ThawState th, Val x, int line) {
  return e(EFreeze{std::move(weak), std::move(th), std::move(x)}, line);
}
Exp label(Name l, std::optional<World> world, Exp body, int line) {
  return e(ELabel{std::move(l), std::move(world), std::move(body)}, line);
}
Exp brk(Name l, Val x, int line) { return e(EBreak{std::move(l), std::move(x)}, line); }

}  // namespace mk

Walk to_walk(const Val& v) {
  return std::visit(
      [&](const auto& n) -> Walk {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, VConst>) return mk::konst(n.value);
        else if constexpr (std::is_same_v<N, VVar>) return mk::var(n.name);
        else if constexpr (std::is_same_v<N, VLoc>) return mk::loc(n.loc);
        else if constexpr (std::is_same_v<N, VFun>) return mk::fun(v);
        else if constexpr (std::is_same_v<N, VTuple>) {
          std::vector<Walk> items;
          for (auto& i : n.items) items.push_back(to_walk(i));
          return mk::tuple(std::move(items));
        } else {
          return mk::extend(to_walk(n.dict), to_walk(n.key), to_walk(n.val));
        }
      },
      v->node);
}

const Location& binding_loc(const HeapBinding& b) {
  return std::visit([](const auto& x) -> const Location& { return x.loc; }, b);
}
const Location& binding_loc(const EnvBinding& b) {
  return std::visit([](const auto& x) -> const Location& { return x.loc; }, b);
}

namespace {

void collect(const HeapType& h, std::vector<std::pair<Name, Ty>>& out, std::set<Name>& seen) {
  for (const auto& b : h.bindings) {
    if (const auto* hb = std::get_if<HBind>(&b)) {
      if (!seen.insert(hb->binder).second) {
        fail(ErrorKind::Structural, "duplicate heap binder " + hb->binder.str());
      }
      out.emplace_back(hb->binder, hb->type);
    }
  }
}

template <class L1, class L2>
std::optional<std::vector<std::size_t>> permutation(const L1& h1, const L2& h2) {
  if (h1.size() != h2.size()) return std::nullopt;
  std::vector<std::size_t> perm;
  std::vector<bool> used(h2.size(), false);
  for (const auto& b1 : h1) {
    const Location& l = binding_loc(b1);
    bool found = false;
    for (std::size_t j = 0; j < h2.size(); ++j) {
      if (!used[j] && binding_loc(h2[j]) == l) {
        used[j] = true;
        perm.push_back(j);
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  return perm;
}

}  // namespace

std::vector<std::pair<Name, Ty>> binders(const HeapType& h) {
  std::vector<std::pair<Name, Ty>> out;
  std::set<Name> seen;
  collect(h, out, seen);
  return out;
}

std::vector<std::pair<Name, Ty>> binders(const World& w) {
  std::vector<std::pair<Name, Ty>> out;
  std::set<Name> seen{w.binder};
  out.emplace_back(w.binder, w.type);
  collect(w.heap, out, seen);
  return out;
}

std::optional<std::vector<std::size_t>> heap_permutation(const std::vector<HeapBinding>& h1,
                                                         const std::vector<HeapBinding>& h2) {
  return permutation(h1, h2);
}

std::optional<std::vector<std::size_t>> heap_permutation(const std::vector<EnvBinding>& h1,
                                                         const std::vector<HeapBinding>& h2) {
  return permutation(h1, h2);
}

}  // namespace dimp
