#include <gtest/gtest.h>

#include <random>

#include "dimp/error.hpp"
#include "dimp/logic.hpp"
#include "dimp/parser.hpp"
#include "dimp/printer.hpp"
#include "dimp/wf.hpp"

using namespace dimp;

namespace {

bool eval(const Form& p, const std::map<std::string, bool>& m) {
  return std::visit(
      [&](const auto& n) -> bool {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, FTrue>) return true;
        if constexpr (std::is_same_v<N, FFalse>) return false;
        if constexpr (std::is_same_v<N, FPred>) return m.at(n.name);
        if constexpr (std::is_same_v<N, FAnd>) {
          return std::all_of(n.items.begin(), n.items.end(), [&](const Form& f) { return eval(f, m); });
        }
        if constexpr (std::is_same_v<N, FOr>) {
          return std::any_of(n.items.begin(), n.items.end(), [&](const Form& f) { return eval(f, m); });
        }
        if constexpr (std::is_same_v<N, FNot>) return !eval(n.body, m);
        if constexpr (std::is_same_v<N, FImplies>) return !eval(n.lhs, m) || eval(n.rhs, m);
        if constexpr (std::is_same_v<N, FIte>) return eval(n.cond, m) ? eval(n.then_f, m) : eval(n.else_f, m);
        ADD_FAILURE() << "unexpected formula";
        return false;
      },
      p->node);
}

bool eval_clauses(const std::vector<Clause>& cs, const std::map<std::string, bool>& m) {
  for (auto& c : cs) {
    bool hyps = true;
    for (auto& h : c.hyps) hyps = hyps && eval(h, m);
    bool goal = false;
    for (auto& g : c.goals) goal = goal || eval(g, m);
    if (hyps && !goal) return false;
  }
  return true;
}

}  // namespace

TEST(Embed, RefinementType) {
  EXPECT_EQ(to_string(embed_type(parse_type("{v | (> v 0)}"), parse_walk("x"))), "(> x 0)");
}

TEST(Embed, ExistentialUsesDummies) {
  FreshScope scope;
  Form f = embed_type(parse_type("(exists y {y | (Int y)} {v | (= v y)})"), parse_walk("x"));
  std::string s = to_string(f);
  EXPECT_NE(s.find("(Int y"), std::string::npos) << s;
  EXPECT_NE(s.find("(= x y"), std::string::npos) << s;
}

TEST(Embed, HeapBindersComeFirst) {
  HeapType h = parse_heap("(heap H (bind l a {v | (> v 0)}) (bind m b {v | (= v a)}))");
  HeapEmbedding e = embed_heap(h);
  ASSERT_EQ(e.dummies.size(), 2u);
  EXPECT_EQ(e.str(), "<a:Top>, <b:Top>, (> a 0), (= b a)");
}

TEST(Embed, WorldBinder) {
  HeapEmbedding e = embed_world(parse_world("(world r {v | (= v 1)} (heap H (bind l a {v | (Int v)})))"));
  EXPECT_EQ(e.str(), "<r:Top>, <a:Top>, (= r 1), (Int a)");
}

TEST(Cnf, ClauseShape) {
  auto cs = cnf(parse_formula("(=> (and (p1) (p2)) (or (p3) (p4)))"));
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].hyps.size(), 2u);
  EXPECT_EQ(cs[0].goals.size(), 2u);
}

TEST(Cnf, ClausesAreAtomic) {
  for (auto& c : cnf(parse_formula("(<=> (and (p1) (not (p2))) (or (p3) (=> (p4) (p1))))"))) {
    for (auto& h : c.hyps) EXPECT_TRUE(is_atom(h)) << to_string(h);
    for (auto& g : c.goals) EXPECT_TRUE(is_atom(g) || to_string(g) == "false") << to_string(g);
  }
}

TEST(Cnf, EmptyGoalIsFalse) {
  auto cs = cnf(parse_formula("(not (p1))"));
  ASSERT_EQ(cs.size(), 1u);
  ASSERT_EQ(cs[0].goals.size(), 1u);
  EXPECT_EQ(to_string(cs[0].goals[0]), "false");
}

TEST(Cnf, RandomTruthTables) {
  std::mt19937 rng(7);
  std::function<std::string(int)> gen = [&](int depth) -> std::string {
    int k = depth == 0 ? 0 : static_cast<int>(rng() % 6);
    switch (k) {
      case 0: return "(p" + std::to_string(1 + rng() % 4) + ")";
      case 1: return "(not " + gen(depth - 1) + ")";
      case 2: return "(and " + gen(depth - 1) + " " + gen(depth - 1) + ")";
      case 3: return "(or " + gen(depth - 1) + " " + gen(depth - 1) + ")";
      case 4: return "(=> " + gen(depth - 1) + " " + gen(depth - 1) + ")";
      default: return "(<=> " + gen(depth - 1) + " " + gen(depth - 1) + ")";
    }
  };
  for (int i = 0; i < 100; ++i) {
    Form p = parse_formula(gen(4));
    auto cs = cnf(p);
    for (int bits = 0; bits < 16; ++bits) {
      std::map<std::string, bool> m;
      for (int j = 0; j < 4; ++j) m["p" + std::to_string(j + 1)] = bits >> j & 1;
      ASSERT_EQ(eval(p, m), eval_clauses(cs, m)) << to_string(p);
      bool all = true;
      for (auto& c : cs) all = all && eval(clause_formula(c), m);
      ASSERT_EQ(all, eval(p, m)) << to_string(p);
    }
  }
}

TEST(Cnf, LiteralLimit) {
  std::string f = "(and";
  for (int i = 0; i < 16; ++i) f += " (or (P a" + std::to_string(i) + ") (P b" + std::to_string(i) + "))";
  f += ")";
  try {
    cnf(parse_formula("(not " + f + ")"));
    FAIL() << "expected the literal limit to be hit";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unsupported);
  }
}

TEST(TInst, ReplacesOnlyTheVariable) {
  Ty t = parse_type("{x | (> x 0)}");
  Form p = parse_formula("(and (:: w A) (:: z B) (= w z))");
  EXPECT_EQ(to_string(tinst(p, Name("A"), t)), "(and (> w 0) (:: z B) (= w z))");
}

TEST(TInst, ReachesArrowWorlds) {
  Ty s = parse_type("{f | (:: f (-> () () (H) (world x {x | (:: x A)} (heap H)) (world y {y | (:: y A)} (heap H))))}");
  Ty r = tinst(s, Name("A"), parse_type("{v | (Int v)}"));
  std::string out = to_string(r);
  EXPECT_EQ(out.find(":: x A"), std::string::npos) << out;
  EXPECT_NE(out.find("(Int x)"), std::string::npos) << out;
}

TEST(Wf, UnboundNames) {
  TypeEnv env;
  EXPECT_THROW(wf_type(env, parse_type("{v | (= v x)}")), Error);
  EXPECT_NO_THROW(wf_type(env.bind(Name("x"), parse_type("{v | true}")), parse_type("{v | (= v x)}")));
  EXPECT_THROW(wf_type(env, parse_type("{v | (:: v A)}")), Error);
  EXPECT_NO_THROW(wf_type(env.tyvar(Name("A")), parse_type("{v | (:: v A)}")));
  EXPECT_THROW(wf_heap(env, parse_heap("(heap H)")), Error);
  EXPECT_NO_THROW(wf_heap(env.heapvar(Name("H")), parse_heap("(heap H)")));
}

TEST(Wf, ArrowQuantifiersScope) {
  TypeEnv env;
  EXPECT_NO_THROW(wf_type(env, parse_type("{f | (:: f (-> (A) (L) (H) (world x {x | (:: x (Ref L))} (heap H (bind L a {a | (:: a A)}))) (world y Top (heap H (bind L b {b | (= b a)})))))}")));
  EXPECT_THROW(wf_type(env, parse_type("{f | (:: f (-> () () (H) (world x {x | (:: x (Ref L))} (heap H)) (world y Top (heap H))))}")), Error);
}

TEST(Wf, OutputSeesInputBinders) {
  TypeEnv env;
  EXPECT_NO_THROW(wf_type(env, parse_type("{f | (:: f (-> () () (H) (world x Top (heap H)) (world y {y | (= y x)} (heap H))))}")));
  EXPECT_THROW(wf_type(env, parse_type("{f | (:: f (-> () () (H) (world x {x | (= x y)} (heap H)) (world y Top (heap H))))}")), Error);
}

TEST(Wf, HeapDuplicates) {
  TypeEnv env = TypeEnv{}.heapvar(Name("H"));
  EXPECT_THROW(wf_heap(env, parse_heap("(heap H (bind l a {v | true}) (bind l b {v | true}))")), Error);
  EXPECT_THROW(wf_heap(env, parse_heap("(heap H (bind l a {v | true}) (bind m a {v | true}))")), Error);
  EXPECT_THROW(wf_world(env, parse_world("(world a Top (heap H (bind l a {v | true})))")), Error);
}

TEST(Wf, FormulaArity) {
  TypeEnv env = TypeEnv{}.bind(Name("x"), parse_type("{v | true}"));
  EXPECT_NO_THROW(wf_formula(env, parse_formula("(has x \"f\")")));
  EXPECT_THROW(wf_formula(env, parse_formula("(= x)")), Error);
}
