#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dimp/djs.hpp"
#include "dimp/error.hpp"
#include "dimp/parser.hpp"
#include "dimp/printer.hpp"
#include "dimp/rename.hpp"
#include "dimp/subst.hpp"

using namespace dimp;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = DIMP_SOURCE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ParseOptions all_features() {
  ParseOptions o;
  o.exists_loc = true;
  o.runtime_locs = true;
  return o;
}

std::vector<fs::path> corpus_files(const char* ext) {
  std::vector<fs::path> out;
  for (auto& e : fs::recursive_directory_iterator(kRoot / "corpus")) {
    if (e.path().extension() != ext) continue;
    if (slurp(e.path()).find("expect: parse") != std::string::npos) continue;
    out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Every binder of `e`, in order.
void binders(const Exp& e, std::vector<Name>& out);
void binders(const Val& v, std::vector<Name>& out) {
  if (auto* f = std::get_if<VFun>(&v->node)) {
    for (auto& p : f->params) out.push_back(p);
    binders(f->body, out);
  }
}
void binders(const Exp& e, std::vector<Name>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, ELet>) {
          out.push_back(n.name);
          binders(n.bound, out);
          binders(n.body, out);
        } else if constexpr (std::is_same_v<N, EVal>) {
          binders(n.value, out);
        } else if constexpr (std::is_same_v<N, EIf>) {
          binders(n.then_e, out);
          binders(n.else_e, out);
        } else if constexpr (std::is_same_v<N, ELabel>) {
          binders(n.body, out);
        } else if constexpr (std::is_same_v<N, EAs>) {
          binders(n.body, out);
        }
      },
      e->node);
}

}  // namespace

TEST(Parser, RoundTripCorpus) {
  int n = 0;
  for (auto& p : corpus_files(".dimp")) {
    Program a = parse_program(slurp(p), all_features());
    std::string once = to_pretty(a);
    Program b = parse_program(once, all_features());
    EXPECT_EQ(to_pretty(b), once) << p;
    ++n;
  }
  EXPECT_GE(n, 76);
}

TEST(Parser, RoundTripDesugared) {
  for (auto& p : corpus_files(".djs")) {
    ParseOptions o;
    o.exists_loc = true;
    std::string once = to_pretty(desugar_program(slurp(p), o));
    EXPECT_EQ(to_pretty(parse_program(once, o)), once) << p;
  }
}

TEST(Parser, TypesNeedBinders) {
  EXPECT_NO_THROW(parse_type("{v | (Int v)}"));
  EXPECT_THROW(parse_type("(Int v)"), Error);
  EXPECT_THROW(parse_type("{v (Int v)}"), Error);
}

TEST(Parser, ArrowRoundTrip) {
  std::string src =
      "{f | (:: f (-> (A) (L) (H) (world x {x | (:: x (Ref L))} (heap H (bind L a {a | (:: a A)})))"
      " (world y Top (heap H (bind L b {b | (= b a)})))))}";
  Ty t = parse_type(src);
  EXPECT_EQ(to_string(parse_type(to_string(t))), to_string(t));
}

TEST(Parser, FeatureGates) {
  EXPECT_THROW(parse_type("(exists-loc L {v | true})"), Error);
  EXPECT_NO_THROW(parse_type("(exists-loc L {v | true})", all_features()));
  EXPECT_THROW(parse_expr("(deref (loc #r1))"), Error);
  EXPECT_NO_THROW(parse_expr("(deref (loc #r1))", all_features()));
}

TEST(Parser, ErrorsCarryLines) {
  try {
    parse_program("(define k {v | true}\n  (let x))");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_GE(e.line(), 1);
  }
}

TEST(Subst, CaptureAvoiding) {
  Ty t = parse_type("{v | (= v x)}");
  Subst s = Subst{}.with(Name("x"), parse_walk("v"));
  Ty r = substitute(s, t);
  EXPECT_TRUE(alpha_equal(r, parse_type("{w | (= w v)}"))) << to_string(r);
  EXPECT_FALSE(alpha_equal(r, parse_type("{w | (= w w)}")));
}

TEST(Subst, BindersShadow) {
  Ty t = parse_type("{x | (= x 1)}");
  Subst s = Subst{}.with(Name("x"), parse_walk("2"));
  EXPECT_TRUE(alpha_equal(substitute(s, t), t));
}

TEST(Subst, FreeVars) {
  auto fv = free_vars(parse_type("{v | (and (= v x) (has y \"f\"))}"));
  EXPECT_EQ(fv, (std::set<Name>{Name("x"), Name("y")}));
}

TEST(Subst, ComposeOrder) {
  Subst inner = Subst{}.with(Name("x"), parse_walk("y"));
  Subst outer = Subst{}.with(Name("y"), parse_walk("z"));
  Walk w = substitute(compose(outer, inner), parse_walk("(+ x y)"));
  EXPECT_EQ(to_string(w), "(+ z z)");
}

TEST(Subst, AlphaEquivalenceIsCanonical) {
  EXPECT_EQ(canonical(parse_type("{a | (> a 0)}")), canonical(parse_type("{b | (> b 0)}")));
  EXPECT_NE(canonical(parse_type("{a | (> a 0)}")), canonical(parse_type("{b | (> b 1)}")));
}

TEST(Rename, BindersAreUnique) {
  for (auto& p : corpus_files(".djs")) {
    ParseOptions o;
    o.exists_loc = true;
    Program prog = rename_program(desugar_program(slurp(p), o));
    for (auto& d : prog.decls) {
      if (d.kind != Decl::Kind::Define) continue;
      std::vector<Name> bs;
      binders(d.body, bs);
      std::set<Name> uniq(bs.begin(), bs.end());
      EXPECT_EQ(uniq.size(), bs.size()) << p << " " << d.name.str();
    }
  }
}

TEST(Rename, Idempotent) {
  for (auto& p : corpus_files(".dimp")) {
    Program once = rename_program(parse_program(slurp(p), all_features()));
    Program twice = rename_program(once);
    EXPECT_EQ(to_pretty(twice), to_pretty(once)) << p;
  }
}

TEST(Rename, KeepsGlobalsFree) {
  Program p = parse_program("(assume x {v | true}) (define k {v | true} (let x 1 x))");
  Program r = rename_program(p);
  std::vector<Name> bs;
  binders(r.decls[1].body, bs);
  ASSERT_EQ(bs.size(), 1u);
  EXPECT_NE(bs[0], Name("x"));
}
