#include <gtest/gtest.h>

#include "dimp/djs.hpp"
#include "dimp/error.hpp"
#include "dimp/printer.hpp"

using namespace dimp;

namespace {

const char* kT = "{f | (:: f (-> () () (H) (world a Top (heap H)) (world r Top (heap H))))}";

std::string ann() { return std::string("/*: ") + kT + " */"; }

std::string desugar(const std::string& src) { return to_pretty(desugar_program(src)); }

std::string error_of(const std::string& src) {
  try {
    desugar_program(src);
  } catch (const Error& e) {
    return e.render();
  }
  return "";
}

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

void walk_exp(const Exp& e, bool wrapped, int& lambdas, int& bad);

void walk_val(const Val& v, int& lambdas, int& bad) {
  if (auto* f = std::get_if<VFun>(&v->node)) {
    ++lambdas;
    walk_exp(f->body, false, lambdas, bad);
  }
}

// Each lambda body reaches its @return label through parameter lets only.
void walk_exp(const Exp& e, bool in_prologue, int& lambdas, int& bad) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, ELet>) {
          walk_exp(n.bound, false, lambdas, bad);
          walk_exp(n.body, in_prologue, lambdas, bad);
        } else if constexpr (std::is_same_v<N, ELabel>) {
          if (n.label == Name("return") && in_prologue) ++bad;
          walk_exp(n.body, false, lambdas, bad);
        } else if constexpr (std::is_same_v<N, EVal>) {
          walk_val(n.value, lambdas, bad);
        } else if constexpr (std::is_same_v<N, EIf>) {
          walk_exp(n.then_e, false, lambdas, bad);
          walk_exp(n.else_e, false, lambdas, bad);
        } else if constexpr (std::is_same_v<N, EAs>) {
          walk_exp(n.body, false, lambdas, bad);
        }
      },
      e->node);
}

}  // namespace

TEST(Desugar, FunctionAnnotationAttached) {
  std::string out = desugar("function f(x) " + ann() + " { return x; }");
  EXPECT_NE(out.find("(define f"), std::string::npos) << out;
  EXPECT_NE(out.find("(world a {v | true} (heap H))"), std::string::npos) << out;
  EXPECT_NE(out.find("(fun\n"), std::string::npos) << out;
  EXPECT_NE(out.find("(ref a_x t_1)"), std::string::npos) << out;
  EXPECT_NE(out.find("(break return"), std::string::npos) << out;
}

TEST(Desugar, FunctionExpression) {
  std::string out = desugar("var g = function (x) " + ann() + " { return x; };");
  EXPECT_NE(out.find("(this arguments)"), std::string::npos) << out;
}

TEST(Desugar, UnsupportedConstructsNamed) {
  EXPECT_NE(error_of("with (o) { }").find("'with' is not in the DJS subset"), std::string::npos);
  EXPECT_NE(error_of("for (;;) { }").find("'for' is not in the DJS subset"), std::string::npos);
  EXPECT_NE(error_of("do { } while (true);").find("'do' is not in the DJS subset"), std::string::npos);
  EXPECT_NE(error_of("var x = 1 == 2;").find("'==' is not in the DJS subset"), std::string::npos);
}

TEST(Desugar, ErrorsArePositionTagged) {
  std::string e = error_of("var x = 1;\nvar y = 2;\nwith (o) { }");
  EXPECT_NE(e.find("line 3"), std::string::npos) << e;
}

TEST(Desugar, AnnotationsRequired) {
  EXPECT_NE(error_of("function f(x) { return x; }").find("needs a type annotation"), std::string::npos);
  EXPECT_NE(error_of("var i = 0; while (i < 3) { i = i + 1; }").find("needs a type annotation"), std::string::npos);
}

TEST(Desugar, Deterministic) {
  std::string loop = "function f(x, y) " + ann() + " { var z = x; /*: " + kT + " */ while (z < 3) { z = z + 1; } return z; }";
  EXPECT_EQ(desugar(loop), desugar(loop));
}

TEST(Desugar, Compositional) {
  std::string f = "function f(x) " + ann() + " { var y = x; return y; }\n";
  std::string g = "function g(x) " + ann() + " { var w = 1; return x; }\n";
  std::string alone = desugar(f);
  std::string with = desugar(g + f);
  EXPECT_NE(with.find(alone), std::string::npos) << with;
}

TEST(Desugar, OneReturnLabelPerLambda) {
  std::string src = "function f(x) " + ann() + " { var g = function (y) " + ann() +
                    " { return y; }; /*: " + kT + " */ while (x < 2) { x = x + 1; } return g; }";
  Program p = desugar_program(src);
  int lambdas = 0, bad = 0;
  for (auto& d : p.decls)
    if (d.kind == Decl::Kind::Define) walk_exp(d.body, false, lambdas, bad);
  std::string out = to_pretty(p);
  EXPECT_EQ(count(out, "(label return"), 2) << out;
  EXPECT_GE(lambdas, 4);
  EXPECT_EQ(bad, 0);
}

TEST(Desugar, ThawCountPreserved) {
  std::string src =
      "/*: (weak ~w {v | (Int v)} lobjproto) */\n/*: (assume w {v | (:: v (Ref ~w))}) */\n"
      "var a = /*: #thaw l1 */ w;\nvar b = /*: #thaw l2 */ w;\n";
  std::string out = desugar(src);
  EXPECT_EQ(count(out, "(thaw l1 w)"), 1) << out;
  EXPECT_EQ(count(out, "(thaw l2 w)"), 1) << out;
  EXPECT_EQ(count(out, "(thaw "), 2) << out;
}

TEST(Desugar, AssertIsCast) {
  std::string out = desugar("assert(true);");
  EXPECT_NE(out.find("(as true {v | (= v true)})"), std::string::npos) << out;
}

TEST(Desugar, ConstructorBuildsPrototype) {
  std::string out = desugar("function P(x) /*: #ctor " + std::string(kT) + " */ { this.x = x; }");
  EXPECT_NE(out.find("(newobj a_Pproto emptydict __ObjectProto)"), std::string::npos) << out;
  EXPECT_NE(out.find("(newobj a_P d __FunctionProto)"), std::string::npos) << out;
  EXPECT_NE(out.find("\"prototype\" p"), std::string::npos) << out;
}
