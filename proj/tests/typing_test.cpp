#include <gtest/gtest.h>

#include "dimp/checker.hpp"
#include "dimp/driver.hpp"
#include "dimp/error.hpp"
#include "dimp/parser.hpp"
#include "dimp/printer.hpp"
#include "dimp/subst.hpp"
#include "dimp/subtype.hpp"

using namespace dimp;

namespace {

Prover prover() { return Prover(std::make_shared<InternalOracle>()); }

bool sub(const TypeEnv& env, const std::string& a, const std::string& b) {
  Prover p = prover();
  try {
    p.sub_type(env, parse_type(a), parse_type(b));
    return true;
  } catch (const Error&) {
    return false;
  }
}

ProgramResult check(const std::string& text, bool exists_loc = false) {
  ParseOptions po;
  po.exists_loc = exists_loc;
  DriverOptions d;
  d.check.exists_loc = exists_loc;
  d.parallel = false;
  return check_program(parse_program(text, po), d);
}

int code(const std::string& text) { return check(text).exit_code(); }

std::string message(const std::string& text) {
  ProgramResult r = check(text);
  for (auto& d : r.defs)
    if (d.error) return d.error->message();
  return r.decl_error ? r.decl_error->message() : "";
}

const char* kArrow =
    "{f | (:: f (-> () () (H) (world x {x | (Int x)} (heap H)) (world y {y | (> y x)} (heap H))))}";
const char* kWeakerArrow =
    "{f | (:: f (-> () () (H) (world x {x | (and (Int x) (> x 0))} (heap H)) (world y {y | (> y 0)} (heap H))))}";

}  // namespace

TEST(Subtype, Refinements) {
  TypeEnv env;
  EXPECT_TRUE(sub(env, "{v | (= v 1)}", "{v | (> v 0)}"));
  EXPECT_FALSE(sub(env, "{v | (> v 0)}", "{v | (= v 1)}"));
  EXPECT_TRUE(sub(env, "{v | false}", "{v | (= v 1)}"));
}

TEST(Subtype, UsesEnvironmentFacts) {
  TypeEnv env = TypeEnv{}.bind(Name("x"), parse_type("{v | (> v 5)}"));
  EXPECT_TRUE(sub(env, "{v | (= v x)}", "{v | (> v 3)}"));
  EXPECT_FALSE(sub(TypeEnv{}.bind(Name("x"), parse_type("{v | true}")), "{v | (= v x)}", "{v | (> v 3)}"));
}

TEST(Subtype, ArrowsAreContravariant) {
  TypeEnv env;
  EXPECT_TRUE(sub(env, kArrow, kWeakerArrow));
  EXPECT_FALSE(sub(env, kWeakerArrow, kArrow));
}

TEST(Subtype, ExistentialOnTheLeft) {
  TypeEnv env;
  EXPECT_TRUE(sub(env, "(exists y {y | (> y 2)} {v | (= v y)})", "{v | (> v 1)}"));
  EXPECT_FALSE(sub(env, "(exists y {y | (> y 0)} {v | (= v y)})", "{v | (> v 1)}"));
}

TEST(Subtype, WorldsMatchBindersByLocation) {
  TypeEnv env = TypeEnv{}.heapvar(Name("H"));
  World w1 = parse_world("(world r {v | (= v 1)} (heap H (bind l a {v | (= v 1)}) (bind m b {v | (= v 2)})))");
  World w2 = parse_world("(world s {v | (> v 0)} (heap H (bind m d {v | (> v 1)}) (bind l c {v | (= v s)})))");
  Prover p = prover();
  Subst pi = p.sub_world(env, w1, w2);
  EXPECT_EQ(to_string(substitute(pi, parse_walk("c"))), "a");
  EXPECT_EQ(to_string(substitute(pi, parse_walk("d"))), "b");
}

TEST(Subtype, WorldsMissingLocationFail) {
  TypeEnv env = TypeEnv{}.heapvar(Name("H"));
  World w1 = parse_world("(world r Top (heap H (bind l a {v | true})))");
  World w2 = parse_world("(world s Top (heap H (bind l a {v | true}) (bind m b {v | true})))");
  Prover p = prover();
  EXPECT_THROW(p.sub_world(env, w1, w2), Error);
}

TEST(Subtype, MatchHeapsSelf) {
  HeapType h = parse_heap("(heap H (bind l a {v | true}) (bind m b {v | true}))");
  Subst s = match_heaps(h, h);
  EXPECT_EQ(to_string(substitute(s, parse_walk("(+ a b)"))), "(+ a b)");
}

TEST(Checker, PrenexForm) {
  EXPECT_TRUE(is_prenex(parse_type("(exists x {x | true} {v | (= v x)})")));
  Ty nested = parse_type("(exists x (exists y {y | true} {x | (= x y)}) {v | (= v x)})");
  EXPECT_FALSE(is_prenex(nested));
  EXPECT_TRUE(is_prenex(prenex(nested)));
}

TEST(Checker, ConstantsAreSingletons) {
  EXPECT_EQ(code("(define k {v | (= v 3)} 3)"), 0);
  EXPECT_EQ(code("(define k {v | (= v 3)} 4)"), 4);
  EXPECT_EQ(code("(define k {v | (Str v)} \"s\")"), 0);
}

TEST(Checker, StrongUpdate) {
  EXPECT_EQ(code("(define k {v | (= v \"s\")} (let r (ref a 1) (let u (setref r \"s\") (deref r))))"), 0);
  EXPECT_EQ(code("(define k {v | (= v 1)} (let r (ref a 1) (let u (setref r \"s\") (deref r))))"), 4);
}

TEST(Checker, BreakMakesTheRestUnreachable) {
  EXPECT_EQ(code("(define k {v | (= v 1)} (label out (world r {r | (= r 1)} (heap H0))"
                 " (let u (break out 1) (as 7 {v | (= v 1)}))))"),
            0);
}

TEST(Checker, BreakValueChecked) {
  EXPECT_EQ(code("(define k {v | (= v 1)} (label out (world r {r | (= r 1)} (heap H0)) (break out 2)))"), 4);
}

TEST(Checker, LabelDiagnosticsDiffer) {
  std::string unbound = message("(define k {v | true} (break nowhere 1))");
  std::string crossing = message(
      "(define k {v | true} (label out (world r Top (heap H0))"
      " (as (fun (x) (break out x)) {v | (:: v (-> () () (H) (world x Top (heap H)) (world y Top (heap H))))})))");
  EXPECT_NE(unbound.find("unbound label"), std::string::npos) << unbound;
  EXPECT_NE(crossing.find("crosses a function boundary"), std::string::npos) << crossing;
}

TEST(Checker, IfJoinsBranches) {
  EXPECT_EQ(code("(assume b {v | (Bool v)}) (define k {v | (and (>= v 1) (<= v 2))} (if b 1 2))"), 0);
  EXPECT_EQ(code("(assume b {v | (Bool v)}) (define k {v | (= v 1)} (if b 1 2))"), 4);
}

TEST(Checker, FunctionsCheckedAgainstArrows) {
  std::string ok = std::string("(define f ") + kArrow + " (fun (x) (app js_plus (tuple x 1))))";
  std::string prelude =
      "(assume js_plus {f | (:: f (-> () () (H) (world p {p | (and (Int (sel p 0)) (Int (sel p 1)))} (heap H))"
      " (world v {v | (= v (+ (sel p 0) (sel p 1)))} (heap H))))})";
  EXPECT_EQ(code(prelude + ok), 0);
  std::string bad = std::string("(define f ") + kArrow + " (fun (x) x))";
  EXPECT_EQ(code(prelude + bad), 4);
}

TEST(Checker, DefinitionsContinueAfterErrors) {
  ProgramResult r = check("(define a {v | (= v 1)} 2) (define b {v | (= v 1)} 1)");
  ASSERT_EQ(r.defs.size(), 2u);
  EXPECT_TRUE(r.defs[0].error.has_value());
  EXPECT_FALSE(r.defs[1].error.has_value());
}

TEST(Checker, ParallelMatchesSequential) {
  std::string text;
  for (int i = 0; i < 12; ++i)
    text += "(define d" + std::to_string(i) + " {v | (= v " + std::to_string(i % 3) + ")} " + std::to_string(i % 4) + ")";
  DriverOptions seq;
  seq.parallel = false;
  DriverOptions par;
  par.parallel = true;
  ProgramResult a = check_program(parse_program(text), seq);
  ProgramResult b = check_program(parse_program(text), par);
  ASSERT_EQ(a.defs.size(), b.defs.size());
  for (std::size_t i = 0; i < a.defs.size(); ++i) {
    EXPECT_EQ(a.defs[i].error.has_value(), b.defs[i].error.has_value());
    if (a.defs[i].error) EXPECT_EQ(a.defs[i].error->message(), b.defs[i].error->message());
  }
}
