#pragma once

// Abstract syntax for the D_imp core calculus: walkable terms, formulas,
// types, heaps, worlds, values, expressions and the environments used by the
// checker. Every node is immutable after construction and shared by pointer.

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dimp {

// An identifier with an optional freshness stamp. Source names have stamp 0;
// renaming and fresh-name generation assign positive stamps.
struct Name {
  std::string base;
  int stamp = 0;

  Name() = default;
  Name(std::string b, int s = 0) : base(std::move(b)), stamp(s) {}
  Name(const char* b) : base(b) {}

  auto operator<=>(const Name&) const = default;
  bool operator==(const Name&) const = default;

  std::string str() const;

  // Returns a name that has never been produced in the current fresh scope.
  static Name fresh(std::string_view base);
  // Makes sure future fresh names never reuse `stamp`.
  static void reserve(int stamp);
};

// Resets the fresh-name counter for the current thread for its lifetime so
// that checking one definition is deterministic regardless of scheduling.
class FreshScope {
 public:
  FreshScope();
  ~FreshScope();
  FreshScope(const FreshScope&) = delete;
  FreshScope& operator=(const FreshScope&) = delete;

 private:
  int saved_;
};

struct Location {
  enum class Kind { StrongConst, WeakConst, StrongVar, WeakVar, RunTime };
  Kind kind = Kind::StrongConst;
  Name name;

  bool is_weak() const { return kind == Kind::WeakConst || kind == Kind::WeakVar; }
  bool is_var() const { return kind == Kind::StrongVar || kind == Kind::WeakVar; }
  std::string str() const;

  auto operator<=>(const Location&) const = default;
  bool operator==(const Location&) const = default;

  static Location strong(Name n);
  static Location weak(Name n);
  static Location var(Name n);
  static Location runtime(Name n);
  // Classifies by spelling: a leading '~' marks weak, an upper-case initial
  // marks a variable.
  static Location parse(std::string_view text);
};

struct Constant {
  enum class Kind { Int, Str, Bool, Null, Undefined, EmptyDict };
  Kind kind = Kind::Undefined;
  std::int64_t i = 0;
  std::string s;
  bool b = false;

  static Constant integer(std::int64_t v) { return {Kind::Int, v, {}, false}; }
  static Constant string(std::string v) { return {Kind::Str, 0, std::move(v), false}; }
  static Constant boolean(bool v) { return {Kind::Bool, 0, {}, v}; }
  static Constant null() { return {Kind::Null, 0, {}, false}; }
  static Constant undefined() { return {Kind::Undefined, 0, {}, false}; }
  static Constant empty_dict() { return {Kind::EmptyDict, 0, {}, false}; }

  std::string str() const;
  bool operator==(const Constant&) const = default;
};

struct Walkable;
struct Formula;
struct TypeTerm;
struct Type;
struct Value;
struct Expr;

using Walk = std::shared_ptr<const Walkable>;
using Form = std::shared_ptr<const Formula>;
using Term = std::shared_ptr<const TypeTerm>;
using Ty = std::shared_ptr<const Type>;
using Val = std::shared_ptr<const Value>;
using Exp = std::shared_ptr<const Expr>;

// ---------------------------------------------------------------------------
// Logical terms

struct WVar { Name name; };
struct WConst { Constant value; };
struct WLoc { Location loc; };
struct WExtend { Walk dict, key, val; };
struct WTuple { std::vector<Walk> items; };
// A lambda value used as a term. Compared by syntactic identity only.
struct WFun { Val fn; };
// Function application: `+`, `-` are arithmetic, `sel` is dictionary/tuple
// selection, anything else is uninterpreted.
struct WApp { std::string fn; std::vector<Walk> args; };

struct Walkable {
  std::variant<WVar, WConst, WLoc, WExtend, WTuple, WFun, WApp> node;
};

// ---------------------------------------------------------------------------
// Formulas

struct FTrue {};
struct FFalse {};
struct FEq { Walk lhs, rhs; };
struct FPred { std::string name; std::vector<Walk> args; };
struct FHasTyp { Walk term; Term type; };
struct FHeapHas { Name heap; Location loc; Walk term; };
struct FAnd { std::vector<Form> items; };
struct FOr { std::vector<Form> items; };
struct FNot { Form body; };
struct FImplies { Form lhs, rhs; };
struct FIte { Form cond, then_f, else_f; };

struct Formula {
  std::variant<FTrue, FFalse, FEq, FPred, FHasTyp, FHeapHas, FAnd, FOr, FNot, FImplies, FIte>
      node;
};

// ---------------------------------------------------------------------------
// Heaps, worlds and types

struct ThawState {
  std::optional<Location> thawed;  // nullopt means frzn

  bool frozen() const { return !thawed.has_value(); }
  std::string str() const;
  bool operator==(const ThawState&) const = default;

  static ThawState frzn() { return {}; }
  static ThawState thwd(Location l) { return {std::move(l)}; }
};

// ℓ ↦ x:T, or ℓ ↦ (x:T, ℓ') when `proto` is set.
struct HBind {
  Location loc;
  Name binder;
  Ty type;
  std::optional<Location> proto;
};
// ~ℓ ↦ θ
struct HWeak {
  Location loc;
  ThawState state;
};
using HeapBinding = std::variant<HBind, HWeak>;

// (H, ĥ). An empty binding list is the VarOnly form.
struct HeapType {
  Name deep;
  std::vector<HeapBinding> bindings;
};

struct World {
  Name binder;
  Ty type;
  HeapType heap;
};

// ~ℓ ↦ (T, ℓ'), used for weak heaps Ψ and type-environment entries.
struct WeakSig {
  Location loc;
  Ty invariant;
  Location proto;
};

struct UArrow {
  std::vector<Name> tyvars;
  std::vector<Location> locvars;  // StrongVar, or WeakVar with weak-poly syntax
  std::vector<Name> heapvars;
  std::vector<WeakSig> weak_heap;  // Ψ, parse-only
  World input;
  World output;
};
struct UTyVar { Name name; };
struct UArray { Ty elem; };
struct URef { Location loc; };
struct UNull {};

struct TypeTerm {
  std::variant<UArrow, UTyVar, UArray, URef, UNull> node;
};

struct TRefine { Name binder; Form pred; };
struct TExists { Name binder; Ty bound; Ty body; };
struct TExistsLoc { Location loc; Ty body; };

struct Type {
  std::variant<TRefine, TExists, TExistsLoc> node;
};

// ---------------------------------------------------------------------------
// Heap environments

struct EBind {
  Location loc;
  Walk value;
  std::optional<Location> proto;
};
using EnvBinding = std::variant<EBind, HWeak>;

struct HeapEnv {
  Name deep;
  std::vector<EnvBinding> bindings;
};

// ---------------------------------------------------------------------------
// Values and expressions

struct VConst { Constant value; };
struct VVar { Name name; };
struct VLoc { Location loc; };
// λ(x̄).e; a single parameter is the plain λx.e, several parameters
// destructure a tuple argument.
struct VFun { std::vector<Name> params; Exp body; };
struct VTuple { std::vector<Val> items; };
struct VExtend { Val dict, key, val; };

struct Value {
  std::variant<VConst, VVar, VLoc, VFun, VTuple, VExtend> node;
};

struct EVal { Val value; };
struct ELet { Name name; Exp bound; Exp body; };
struct EIf { Val cond; Exp then_e, else_e; };
struct ENewRef { Location loc; Val init; };
struct EDeref { Val ref; };
struct ESetRef { Val ref, value; };
struct ENewObj { Location loc; Val dict, proto; };
struct EApp {
  std::vector<Ty> types;
  std::vector<Location> locs;
  std::vector<HeapType> heaps;
  bool explicit_inst = false;
  Val fn, arg;
};
struct EAs { Exp body; Ty type; };
struct EThaw { Location loc; Val ref; };
struct EFreeze { Location weak; ThawState state; Val ref; };
// A label without a world takes the enclosing function's output world.
struct ELabel { Name label; std::optional<World> world; Exp body; };
struct EBreak { Name label; Val value; };

struct Expr {
  std::variant<EVal, ELet, EIf, ENewRef, EDeref, ESetRef, ENewObj, EApp, EAs, EThaw, EFreeze,
               ELabel, EBreak>
      node;
  int line = 0;
};

// ---------------------------------------------------------------------------
// Constructors

namespace mk {

Walk var(Name n);
Walk cint(std::int64_t v);
Walk cstr(std::string s);
Walk cbool(bool b);
Walk null();
Walk undefined();
Walk empty_dict();
Walk konst(Constant c);
Walk loc(Location l);
Walk extend(Walk d, Walk k, Walk v);
Walk tuple(std::vector<Walk> items);
Walk fun(Val lambda);
Walk app(std::string fn, std::vector<Walk> args);
Walk sel(Walk d, Walk k);

Form tru();
Form fls();
Form eq(Walk a, Walk b);
Form neq(Walk a, Walk b);
Form pred(std::string name, std::vector<Walk> args);
Form has_typ(Walk w, Term u);
Form heap_has(Name h, Location l, Walk w);
// Flattens nested conjunctions and drops `true`.
Form conj(std::vector<Form> items);
Form disj(std::vector<Form> items);
Form neg(Form p);
Form implies(Form a, Form b);
Form ite(Form c, Form a, Form b);

Term arrow(UArrow a);
Term tyvar(Name n);
Term array(Ty elem);
Term ref(Location l);
Term null_term();

Ty refine(Name binder, Form p);
Ty top();
Ty bottom();
Ty exists(Name binder, Ty bound, Ty body);
Ty exists_loc(Location l, Ty body);
// {ν | ν :: Ref m}
Ty ref_type(Location l);
// {ν | ν = w}
Ty singleton(Walk w);

Val vconst(Constant c);
Val vvar(Name n);
Val vloc(Location l);
Val vfun(std::vector<Name> params, Exp body);
Val vtuple(std::vector<Val> items);
Val vextend(Val d, Val k, Val v);

Exp val(Val v, int line = 0);
Exp let(Name x, Exp bound, Exp body, int line = 0);
Exp ife(Val c, Exp a, Exp b, int line = 0);
Exp newref(Location l, Val v, int line = 0);
Exp deref(Val v, int line = 0);
Exp setref(Val r, Val v, int line = 0);
Exp newobj(Location l, Val d, Val p, int line = 0);
Exp app(Val f, Val a, int line = 0);
Exp app_inst(std::vector<Ty> ts, std::vector<Location> ls, std::vector<HeapType> hs, Val f, Val a,
             int line = 0);
Exp as(Exp e, Ty t, int line = 0);
Exp thaw(Location l, Val v, int line = 0);
Exp freeze(Location weak, ThawState th, Val v, int line = 0);
Exp label(Name l, std::optional<World> w, Exp body, int line = 0);
Exp brk(Name l, Val v, int line = 0);

}  // namespace mk

// Converts a value to the logical term denoting it.
Walk to_walk(const Val& v);

// The location named by a binding.
const Location& binding_loc(const HeapBinding& b);
const Location& binding_loc(const EnvBinding& b);

// All binders of a heap or world, in binding order: the world's value binder
// first, then every ℓ ↦ x:T binder. Throws StructuralError on duplicates.
std::vector<std::pair<Name, Ty>> binders(const HeapType& h);
std::vector<std::pair<Name, Ty>> binders(const World& w);

// Returns the permutation p (h2[p[i]] matches h1[i] by location) when the two
// binding lists bind the same locations, nullopt otherwise.
std::optional<std::vector<std::size_t>> heap_permutation(const std::vector<HeapBinding>& h1,
                                                         const std::vector<HeapBinding>& h2);
std::optional<std::vector<std::size_t>> heap_permutation(const std::vector<EnvBinding>& h1,
                                                         const std::vector<HeapBinding>& h2);

}  // namespace dimp
