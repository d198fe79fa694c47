#include "dimp/parser.hpp"

#include <cctype>
#include <set>

#include "dimp/error.hpp"

namespace dimp {

namespace {

const std::set<std::string, std::less<>> kReserved = {
    "true",  "false", "null",   "undefined", "emptydict", "let",   "if",     "ref",
    "deref", "setref", "newobj", "app",      "as",        "thaw",  "freeze", "label",
    "break", "fun",   "tuple",  "extend",    "seq",       "upd",   "loc",    "|",
    "Top",   "Bot",   "Null",   "->",        "::",        "and",   "or",     "not",
    "=>",    "<=>",   "ite",    "=",         "!=",        "heap-has"};

[[noreturn]] void bad(const SExpr& s, const std::string& what) {
  fail(ErrorKind::Parse, what + ": " + write_flat(s), s.line);
}

bool is_int(const std::string& t) {
  std::size_t i = (t.size() > 1 && t[0] == '-') ? 1 : 0;
  if (i >= t.size()) return false;
  for (; i < t.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  }
  return true;
}

std::optional<Constant> constant(const SExpr& s) {
  if (s.kind == SExpr::Kind::String) return Constant::string(s.text);
  if (!s.is_atom()) return std::nullopt;
  const auto& t = s.text;
  if (is_int(t)) {
    try {
      return Constant::integer(std::stoll(t));
    } catch (const std::out_of_range&) {
      bad(s, "integer literal out of range");
    }
  }
  if (t == "true") return Constant::boolean(true);
  if (t == "false") return Constant::boolean(false);
  if (t == "null") return Constant::null();
  if (t == "undefined") return Constant::undefined();
  if (t == "emptydict") return Constant::empty_dict();
  return std::nullopt;
}

void arity(const SExpr& s, std::size_t n, const char* what) {
  if (s.items.size() != n) bad(s, std::string("malformed ") + what);
}

const std::vector<SExpr>& list_items(const SExpr& s, const char* what) {
  if (!s.is_list() || s.bracket != '(') bad(s, std::string("expected a list of ") + what);
  return s.items;
}

}  // namespace

Name Parser::name(const SExpr& s) const {
  if (!s.is_atom() || s.text.empty()) bad(s, "expected an identifier");
  const auto& t = s.text;
  if (kReserved.count(t) || is_int(t) || t[0] == '~' || t[0] == '#' || t[0] == '$') {
    bad(s, "invalid identifier");
  }
  auto dollar = t.find('$');
  if (dollar == std::string::npos) return Name(t);
  std::string stamp = t.substr(dollar + 1);
  if (stamp.empty() || !is_int(stamp) || stamp[0] == '-') bad(s, "invalid identifier stamp");
  Name n(t.substr(0, dollar), std::stoi(stamp));
  Name::reserve(n.stamp);
  return n;
}

// Labels live in their own namespace, so keywords such as `break` are allowed.
Name Parser::label_name(const SExpr& s) const {
  if (s.is_atom() && kReserved.count(s.text) && s.text != "|") return Name(s.text);
  return name(s);
}

Location Parser::location(const SExpr& s) const {
  if (!s.is_atom() || s.text.empty() || (s.text == "~")) bad(s, "expected a location");
  const auto& t = s.text;
  if (t[0] == '#') {
    if (!opts_.runtime_locs) bad(s, "run-time locations cannot appear in source programs");
    Name n = name(SExpr::atom(t.substr(1)));
    return Location::runtime(n);
  }
  std::string_view body = t;
  if (body[0] == '~') body.remove_prefix(1);
  if (body.empty() || !(std::isalpha(static_cast<unsigned char>(body[0])) || body[0] == '_')) {
    bad(s, "invalid location");
  }
  Location l = Location::parse(t);
  if (l.kind == Location::Kind::WeakVar && !opts_.weak_poly) {
    bad(s, "weak location variables require --feature weak-poly-syntax");
  }
  return l;
}

ThawState Parser::thaw_state(const SExpr& s) const {
  if (s.is_atom("frzn")) return ThawState::frzn();
  if (s.is_form("thwd") && s.items.size() == 2) {
    Location l = location(s.items[1]);
    if (l.is_weak()) bad(s, "a thawed location must be strong");
    return ThawState::thwd(l);
  }
  bad(s, "expected frzn or (thwd l)");
}

Walk Parser::walk(const SExpr& s) const {
  if (auto c = constant(s)) return mk::konst(*c);
  if (s.is_atom()) return mk::var(name(s));
  if (!s.is_list() || s.bracket != '(' || s.items.empty() || !s.items[0].is_atom()) {
    bad(s, "malformed term");
  }
  const auto& head = s.items[0].text;
  if (head == "upd") {
    arity(s, 4, "upd");
    return mk::extend(walk(s.items[1]), walk(s.items[2]), walk(s.items[3]));
  }
  if (head == "tuple") {
    std::vector<Walk> items;
    for (std::size_t i = 1; i < s.items.size(); ++i) items.push_back(walk(s.items[i]));
    return mk::tuple(std::move(items));
  }
  if (head == "fun") return mk::fun(value(s));
  if (head == "loc") {
    arity(s, 2, "loc");
    return mk::loc(location(s.items[1]));
  }
  if (kReserved.count(head)) bad(s, "unexpected keyword in term");
  std::vector<Walk> args;
  for (std::size_t i = 1; i < s.items.size(); ++i) args.push_back(walk(s.items[i]));
  return mk::app(head, std::move(args));
}

Form Parser::formula(const SExpr& s) const {
  if (s.is_atom("true")) return mk::tru();
  if (s.is_atom("false")) return mk::fls();
  if (!s.is_list() || s.bracket != '(' || s.items.empty() || !s.items[0].is_atom()) {
    bad(s, "malformed formula");
  }
  const auto& head = s.items[0].text;
  auto sub = [&](std::size_t i) { return formula(s.items[i]); };
  if (head == "=") {
    arity(s, 3, "=");
    return mk::eq(walk(s.items[1]), walk(s.items[2]));
  }
  if (head == "!=") {
    arity(s, 3, "!=");
    return mk::neq(walk(s.items[1]), walk(s.items[2]));
  }
  if (head == "and" || head == "or") {
    std::vector<Form> items;
    for (std::size_t i = 1; i < s.items.size(); ++i) items.push_back(sub(i));
    if (head == "and") return std::make_shared<const Formula>(Formula{FAnd{std::move(items)}});
    return std::make_shared<const Formula>(Formula{FOr{std::move(items)}});
  }
  if (head == "not") {
    arity(s, 2, "not");
    return mk::neg(sub(1));
  }
  if (head == "=>") {
    arity(s, 3, "=>");
    return mk::implies(sub(1), sub(2));
  }
  if (head == "<=>") {
    arity(s, 3, "<=>");
    Form a = sub(1), b = sub(2);
    return std::make_shared<const Formula>(
        Formula{FAnd{{mk::implies(a, b), mk::implies(b, a)}}});
  }
  if (head == "ite") {
    arity(s, 4, "ite");
    return mk::ite(sub(1), sub(2), sub(3));
  }
  if (head == "::") {
    arity(s, 3, "::");
    return mk::has_typ(walk(s.items[1]), term(s.items[2]));
  }
  if (head == "heap-has") {
    arity(s, 4, "heap-has");
    return mk::heap_has(name(s.items[1]), location(s.items[2]), walk(s.items[3]));
  }
  if (kReserved.count(head)) bad(s, "unexpected keyword in formula");
  std::vector<Walk> args;
  for (std::size_t i = 1; i < s.items.size(); ++i) args.push_back(walk(s.items[i]));
  return mk::pred(head, std::move(args));
}

Term Parser::term(const SExpr& s) const {
  if (s.is_atom("Null")) return mk::null_term();
  if (s.is_atom()) return mk::tyvar(name(s));
  if (s.is_form("Ref")) {
    arity(s, 2, "Ref");
    return mk::ref(location(s.items[1]));
  }
  if (s.is_form("Array")) {
    arity(s, 2, "Array");
    return mk::array(type(s.items[1]));
  }
  if (s.is_form("->")) {
    if (s.items.size() != 6 && s.items.size() != 7) bad(s, "malformed arrow");
    UArrow a;
    for (auto& t : list_items(s.items[1], "type variables")) a.tyvars.push_back(name(t));
    for (auto& l : list_items(s.items[2], "location variables")) {
      Location loc = location(l);
      if (!loc.is_var()) bad(l, "arrow location parameters must be variables");
      a.locvars.push_back(loc);
    }
    for (auto& h : list_items(s.items[3], "heap variables")) a.heapvars.push_back(name(h));
    std::size_t next = 4;
    if (s.items.size() == 7) {
      const auto& psi = s.items[4];
      if (!psi.is_form("psi")) bad(psi, "expected (psi ...)");
      if (!opts_.weak_poly) bad(psi, "weak heaps in arrows require --feature weak-poly-syntax");
      for (std::size_t i = 1; i < psi.items.size(); ++i) {
        const auto& b = psi.items[i];
        if (!b.is_list() || b.items.size() != 3) bad(b, "malformed weak heap binding");
        Location l = location(b.items[0]);
        if (!l.is_weak()) bad(b, "weak heap bindings need a weak location");
        a.weak_heap.push_back({l, type(b.items[1]), location(b.items[2])});
      }
      next = 5;
    }
    a.input = world(s.items[next]);
    a.output = world(s.items[next + 1]);
    auto distinct = [&](auto const& v) {
      std::set<std::string> seen;
      for (auto& x : v) {
        if (!seen.insert(x.str()).second) bad(s, "arrow quantifiers must be distinct");
      }
    };
    distinct(a.tyvars);
    distinct(a.locvars);
    distinct(a.heapvars);
    return mk::arrow(std::move(a));
  }
  bad(s, "malformed type term");
}

Ty Parser::type(const SExpr& s) const {
  if (s.is_atom("Top")) return mk::top();
  if (s.is_atom("Bot")) return mk::bottom();
  if (s.is_list() && s.bracket == '{') {
    if (s.items.size() != 3 || !s.items[1].is_atom("|")) bad(s, "malformed refinement type");
    return mk::refine(name(s.items[0]), formula(s.items[2]));
  }
  if (s.is_form("exists")) {
    arity(s, 4, "exists");
    return mk::exists(name(s.items[1]), type(s.items[2]), type(s.items[3]));
  }
  if (s.is_form("exists-loc")) {
    if (!opts_.exists_loc) bad(s, "existential locations require --feature exists-loc");
    arity(s, 3, "exists-loc");
    Location l = location(s.items[1]);
    if (l.is_weak()) bad(s, "existential locations must be strong");
    return mk::exists_loc(l, type(s.items[2]));
  }
  bad(s, "malformed type");
}

World Parser::world(const SExpr& s) const {
  if (!s.is_form("world")) bad(s, "expected (world x T HEAP)");
  arity(s, 4, "world");
  return World{name(s.items[1]), type(s.items[2]), heap(s.items[3])};
}

HeapType Parser::heap(const SExpr& s) const {
  if (!s.is_form("heap") || s.items.size() < 2) bad(s, "expected (heap H ...)");
  HeapType h;
  h.deep = name(s.items[1]);
  for (std::size_t i = 2; i < s.items.size(); ++i) {
    const auto& b = s.items[i];
    if (b.is_form("bind")) {
      if (b.items.size() != 4 && b.items.size() != 5) bad(b, "malformed heap binding");
      Location l = location(b.items[1]);
      if (l.is_weak()) bad(b, "value bindings need a strong location");
      std::optional<Location> proto;
      if (b.items.size() == 5) proto = location(b.items[4]);
      h.bindings.push_back(HBind{l, name(b.items[2]), type(b.items[3]), proto});
    } else if (b.is_form("weak")) {
      arity(b, 3, "weak binding");
      Location l = location(b.items[1]);
      if (!l.is_weak()) bad(b, "weak bindings need a weak location");
      h.bindings.push_back(HWeak{l, thaw_state(b.items[2])});
    } else {
      bad(b, "expected (bind ...) or (weak ...)");
    }
  }
  return h;
}

HeapEnv Parser::heap_env(const SExpr& s) const {
  if (!s.is_form("heapenv") || s.items.size() < 2) bad(s, "expected (heapenv H ...)");
  HeapEnv h;
  h.deep = name(s.items[1]);
  for (std::size_t i = 2; i < s.items.size(); ++i) {
    const auto& b = s.items[i];
    if (b.is_form("val")) {
      if (b.items.size() != 3 && b.items.size() != 4) bad(b, "malformed heap entry");
      std::optional<Location> proto;
      if (b.items.size() == 4) proto = location(b.items[3]);
      h.bindings.push_back(EBind{location(b.items[1]), walk(b.items[2]), proto});
    } else if (b.is_form("weak")) {
      arity(b, 3, "weak binding");
      h.bindings.push_back(HWeak{location(b.items[1]), thaw_state(b.items[2])});
    } else {
      bad(b, "expected (val ...) or (weak ...)");
    }
  }
  return h;
}

Val Parser::value(const SExpr& s) const {
  if (auto c = constant(s)) return mk::vconst(*c);
  if (s.is_atom()) return mk::vvar(name(s));
  if (s.is_form("fun")) {
    arity(s, 3, "fun");
    std::vector<Name> params;
    for (auto& p : list_items(s.items[1], "parameters")) params.push_back(name(p));
    if (params.empty()) params.push_back(Name("_"));
    return mk::vfun(std::move(params), expr(s.items[2]));
  }
  if (s.is_form("tuple")) {
    std::vector<Val> items;
    for (std::size_t i = 1; i < s.items.size(); ++i) items.push_back(value(s.items[i]));
    return mk::vtuple(std::move(items));
  }
  if (s.is_form("extend")) {
    arity(s, 4, "extend");
    return mk::vextend(value(s.items[1]), value(s.items[2]), value(s.items[3]));
  }
  if (s.is_form("loc")) {
    arity(s, 2, "loc");
    Location l = location(s.items[1]);
    if (l.kind != Location::Kind::RunTime) bad(s, "(loc ...) takes a run-time location");
    return mk::vloc(l);
  }
  bad(s, "expected a value");
}

Exp Parser::expr(const SExpr& s) const {
  int line = s.line;
  if (!s.is_list() || s.bracket != '(' || s.items.empty() || !s.items[0].is_atom()) {
    return mk::val(value(s), line);
  }
  const auto& head = s.items[0].text;
  if (head == "fun" || head == "tuple" || head == "extend" || head == "loc") {
    return mk::val(value(s), line);
  }
  if (head == "let") {
    arity(s, 4, "let");
    return mk::let(name(s.items[1]), expr(s.items[2]), expr(s.items[3]), line);
  }
  if (head == "seq") {
    if (s.items.size() < 2) bad(s, "empty seq");
    Exp out = expr(s.items.back());
    for (std::size_t i = s.items.size() - 2; i >= 1; --i) {
      out = mk::let(Name("_"), expr(s.items[i]), out, s.items[i].line);
    }
    return out;
  }
  if (head == "if") {
    arity(s, 4, "if");
    return mk::ife(value(s.items[1]), expr(s.items[2]), expr(s.items[3]), line);
  }
  if (head == "ref") {
    arity(s, 3, "ref");
    Location l = location(s.items[1]);
    if (l.is_weak()) bad(s, "allocation needs a strong location");
    return mk::newref(l, value(s.items[2]), line);
  }
  if (head == "deref") {
    arity(s, 2, "deref");
    return mk::deref(value(s.items[1]), line);
  }
  if (head == "setref") {
    arity(s, 3, "setref");
    return mk::setref(value(s.items[1]), value(s.items[2]), line);
  }
  if (head == "newobj") {
    arity(s, 4, "newobj");
    Location l = location(s.items[1]);
    if (l.is_weak()) bad(s, "allocation needs a strong location");
    return mk::newobj(l, value(s.items[2]), value(s.items[3]), line);
  }
  if (head == "app") {
    if (s.items.size() == 3) return mk::app(value(s.items[1]), value(s.items[2]), line);
    arity(s, 4, "app");
    const auto& inst = s.items[1];
    if (!inst.is_form("inst") || inst.items.size() != 4) bad(inst, "expected (inst (T..) (m..) (HEAP..))");
    std::vector<Ty> ts;
    std::vector<Location> ls;
    std::vector<HeapType> hs;
    for (auto& t : list_items(inst.items[1], "types")) ts.push_back(type(t));
    for (auto& l : list_items(inst.items[2], "locations")) ls.push_back(location(l));
    for (auto& h : list_items(inst.items[3], "heaps")) hs.push_back(heap(h));
    return mk::app_inst(std::move(ts), std::move(ls), std::move(hs), value(s.items[2]),
                        value(s.items[3]), line);
  }
  if (head == "as") {
    arity(s, 3, "as");
    return mk::as(expr(s.items[1]), type(s.items[2]), line);
  }
  if (head == "thaw") {
    arity(s, 3, "thaw");
    Location l = location(s.items[1]);
    if (l.is_weak()) bad(s, "thaw names the strong location to create");
    return mk::thaw(l, value(s.items[2]), line);
  }
  if (head == "freeze") {
    arity(s, 4, "freeze");
    Location l = location(s.items[1]);
    if (!l.is_weak()) bad(s, "freeze needs a weak location");
    return mk::freeze(l, thaw_state(s.items[2]), value(s.items[3]), line);
  }
  if (head == "label") {
    if (s.items.size() == 3) return mk::label(label_name(s.items[1]), std::nullopt, expr(s.items[2]), line);
    arity(s, 4, "label");
    return mk::label(label_name(s.items[1]), world(s.items[2]), expr(s.items[3]), line);
  }
  if (head == "break") {
    arity(s, 3, "break");
    return mk::brk(label_name(s.items[1]), value(s.items[2]), line);
  }
  bad(s, "unknown expression form");
}

Decl Parser::decl(const SExpr& s) const {
  Decl d;
  d.line = s.line;
  auto is = [&](const char* h, std::size_t n) {
    if (!s.is_form(h)) return false;
    arity(s, n, h);
    return true;
  };
  if (is("heapvar", 2)) {
    d.kind = Decl::Kind::HeapVar;
    d.name = name(s.items[1]);
  } else if (is("tyvar", 2)) {
    d.kind = Decl::Kind::TyVar;
    d.name = name(s.items[1]);
  } else if (is("locvar", 2)) {
    d.kind = Decl::Kind::LocVar;
    d.loc = location(s.items[1]);
    if (!d.loc.is_var()) bad(s, "locvar needs a location variable");
  } else if (is("assume", 3)) {
    d.kind = Decl::Kind::Assume;
    d.name = name(s.items[1]);
    d.type = type(s.items[2]);
  } else if (is("fact", 2)) {
    d.kind = Decl::Kind::Fact;
    d.fact = formula(s.items[1]);
  } else if (is("weak", 4)) {
    d.kind = Decl::Kind::Weak;
    d.loc = location(s.items[1]);
    if (!d.loc.is_weak()) bad(s, "weak declaration needs a weak location");
    d.type = type(s.items[2]);
    d.proto = location(s.items[3]);
  } else if (is("initial-heap", 2)) {
    d.kind = Decl::Kind::InitialHeap;
    d.heap = heap(s.items[1]);
  } else if (is("define", 4)) {
    d.kind = Decl::Kind::Define;
    d.name = name(s.items[1]);
    d.type = type(s.items[2]);
    d.body = expr(s.items[3]);
  } else {
    bad(s, "unknown declaration");
  }
  return d;
}

Program Parser::program(std::string_view text) const {
  Program p;
  for (auto& s : read_sexprs(text)) p.decls.push_back(decl(s));
  return p;
}

SExpr read_one(std::string_view text) {
  auto all = read_sexprs(text);
  if (all.size() != 1) fail(ErrorKind::Parse, "expected exactly one datum");
  return std::move(all[0]);
}

Walk parse_walk(std::string_view text, ParseOptions o) { return Parser(o).walk(read_one(text)); }
Form parse_formula(std::string_view text, ParseOptions o) { return Parser(o).formula(read_one(text)); }
Term parse_term(std::string_view text, ParseOptions o) { return Parser(o).term(read_one(text)); }
Ty parse_type(std::string_view text, ParseOptions o) { return Parser(o).type(read_one(text)); }
World parse_world(std::string_view text, ParseOptions o) { return Parser(o).world(read_one(text)); }
HeapType parse_heap(std::string_view text, ParseOptions o) { return Parser(o).heap(read_one(text)); }
Exp parse_expr(std::string_view text, ParseOptions o) { return Parser(o).expr(read_one(text)); }
Program parse_program(std::string_view text, ParseOptions o) { return Parser(o).program(text); }

}  // namespace dimp
