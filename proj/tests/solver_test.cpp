#include <gtest/gtest.h>

#include <filesystem>

#include "dimp/error.hpp"
#include "dimp/parser.hpp"
#include "dimp/solver.hpp"

using namespace dimp;

namespace {

Obligation ob(std::vector<std::string> hyps, const std::string& goal) {
  Obligation o;
  for (auto& h : hyps) o.hyps.push_back(parse_formula(h));
  o.goal = parse_formula(goal);
  return o;
}

Verdict internal(const Obligation& o) { return InternalOracle().check(o).verdict; }

bool have_z3() { return std::filesystem::exists("/usr/local/bin/z3"); }

}  // namespace

TEST(Solver, Reflexivity) { EXPECT_EQ(internal(ob({}, "(= x x)")), Verdict::Valid); }

TEST(Solver, Transitivity) {
  EXPECT_EQ(internal(ob({"(= x y)", "(= y z)"}, "(= x z)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= x y)"}, "(= x z)")), Verdict::Invalid);
}

TEST(Solver, Congruence) {
  EXPECT_EQ(internal(ob({"(= x y)"}, "(= (f x) (f y))")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= x y)", "(P x)"}, "(P y)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= (f x) (f y))"}, "(= x y)")), Verdict::Invalid);
}

TEST(Solver, DistinctConstants) {
  EXPECT_EQ(internal(ob({"(= x null)", "(= x undefined)"}, "false")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= x \"a\")"}, "(!= x \"b\")")), Verdict::Valid);
  EXPECT_EQ(internal(ob({}, "(!= 1 true)")), Verdict::Valid);
}

TEST(Solver, Arithmetic) {
  EXPECT_EQ(internal(ob({"(> x 0)"}, "(>= x 1)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= y (+ x 1))", "(> x 3)"}, "(> y 4)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(>= x 0)"}, "(> x 0)")), Verdict::Invalid);
  EXPECT_EQ(internal(ob({"(< 0 (* 2 x))", "(< (* 2 x) 2)"}, "false")), Verdict::Invalid);
  EXPECT_EQ(internal(ob({"(<= x y)", "(<= y x)"}, "(= x y)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(!= x y)"}, "(or (< x y) (> x y))")), Verdict::Valid);
}

TEST(Solver, IntegerTightening) {
  EXPECT_EQ(internal(ob({"(< 0 (+ x x))", "(< (+ x x) 2)"}, "false")), Verdict::Valid);
}

TEST(Solver, EqualitySharing) {
  EXPECT_EQ(internal(ob({"(<= x y)", "(<= y x)", "(= (f x) 1)"}, "(= (f y) 1)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(<= x y)", "(<= y x)", "(P x)"}, "(P y)")), Verdict::Valid);
}

TEST(Solver, Truthiness) {
  EXPECT_EQ(internal(ob({"(truthy x)", "(Bool x)"}, "(= x true)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= x null)"}, "(falsy x)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(truthy x)"}, "(= x true)")), Verdict::Invalid);
}

TEST(Solver, TupleSelection) {
  EXPECT_EQ(internal(ob({"(= t (tuple a b))"}, "(= (sel t 1) b)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= t (tuple a b))"}, "(= (sel t \"0\") a)")), Verdict::Valid);
}

TEST(Solver, ReadOverWrite) {
  EXPECT_EQ(internal(ob({"(= d (upd e \"f\" 3))"}, "(= (sel d \"f\") 3)")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= d (upd e \"f\" 3))", "(= (sel e \"g\") 4)"}, "(= (sel d \"g\") 4)")),
            Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= d (upd e \"f\" 3))"}, "(has d \"f\")")), Verdict::Valid);
  EXPECT_EQ(internal(ob({"(= d (upd e k 3))"}, "(= (sel d \"g\") 3)")), Verdict::Invalid);
}

TEST(Solver, InvalidCarriesModel) {
  OracleResult r = InternalOracle().check(ob({"(> x 2)"}, "(> x 5)"));
  ASSERT_EQ(r.verdict, Verdict::Invalid);
  EXPECT_NE(r.model.find("x = "), std::string::npos);
}

TEST(Solver, ScriptIsDeterministic) {
  Obligation o = ob({"(= d (upd e \"f\" 3))", "(truthy y)"}, "(= (sel d \"f\") 3)");
  EXPECT_EQ(emit_smtlib(o), emit_smtlib(o));
  std::string s = emit_smtlib(o);
  EXPECT_NE(s.find("(check-sat)"), std::string::npos);
  EXPECT_NE(s.find("distinct"), std::string::npos);
}

TEST(Solver, SpecParsing) {
  EXPECT_FALSE(parse_solver_spec("internal", 100).external);
  SolverConfig c = parse_solver_spec("external:/bin/z3x", 100);
  EXPECT_TRUE(c.external);
  EXPECT_THROW(parse_solver_spec("bogus", 100), Error);
}

TEST(Solver, ExternalMissingBinaryIsUnknown) {
  ExternalOracle o("/nonexistent/solver", 1000);
  EXPECT_EQ(o.check(ob({}, "(= x x)")).verdict, Verdict::Unknown);
}

TEST(Solver, ExternalAgreesWithInternal) {
  if (!have_z3()) GTEST_SKIP() << "z3 not installed";
  ExternalOracle z3("/usr/local/bin/z3", 5000);
  std::vector<Obligation> cases = {
      ob({"(= x y)", "(= y z)"}, "(= x z)"),
      ob({"(= x y)"}, "(= x z)"),
      ob({"(> x 0)"}, "(>= x 1)"),
      ob({"(>= x 0)"}, "(> x 0)"),
      ob({"(truthy x)", "(Bool x)"}, "(= x true)"),
      ob({"(= t (tuple a b))"}, "(= (sel t 1) b)"),
      ob({"(= d (upd e \"f\" 3))", "(= (sel e \"g\") 4)"}, "(= (sel d \"g\") 4)"),
      ob({"(= d (upd e k 3))"}, "(= (sel d \"g\") 3)"),
      ob({"(= x null)", "(= x undefined)"}, "false"),
  };
  for (auto& c : cases) {
    Verdict a = internal(c);
    OracleResult b = z3.check(c);
    EXPECT_EQ(a, b.verdict) << emit_smtlib(c) << b.detail;
  }
}
