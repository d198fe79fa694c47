#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "dimp/cli.hpp"

using namespace dimp;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = DIMP_SOURCE_DIR;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const fs::path& p, CliConfig cfg = {}) {
  std::ostringstream out, err;
  int code = check_file(p.string(), cfg, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_file(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / ("dimp_cli_test_" + name);
  std::ofstream(p) << text;
  return p;
}

bool have_z3() { return fs::exists("/usr/local/bin/z3"); }

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run(temp_file("ok.dimp", "(define k {v | (= v 1)} 1)")).code, 0);
  EXPECT_EQ(run(temp_file("parse.dimp", "(define k")).code, 2);
  EXPECT_EQ(run(temp_file("wf.dimp", "(define k {v | (= v z)} 1)")).code, 3);
  EXPECT_EQ(run(temp_file("type.dimp", "(define k {v | (= v 1)} 2)")).code, 4);
  EXPECT_EQ(run(kRoot / "corpus" / "no_such_file.dimp").code, 1);
}

TEST(Cli, FalsehoodPrintsClause) {
  Outcome r = run(temp_file("false.dimp", "(define k {v | (= v 1)} (as 2 {v | (= v 1)}))"));
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("failing clause"), std::string::npos) << r.err;
}

TEST(Cli, EmitDimp) {
  CliConfig cfg;
  cfg.emit_dimp = true;
  Outcome r = run(kRoot / "corpus" / "desugar" / "DS-Return.djs", cfg);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("(label return (break return 1))"), std::string::npos) << r.out;
}

TEST(Cli, EmitObligations) {
  CliConfig cfg;
  cfg.emit_obligations = true;
  Outcome r = run(temp_file("ob.dimp", "(assume x {v | (> v 0)}) (define k {v | (> v -1)} x)"), cfg);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("(check-sat)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("valid"), std::string::npos) << r.out;
}

TEST(Cli, JsonIsByteStable) {
  CliConfig cfg;
  cfg.json = true;
  cfg.emit_obligations = true;
  fs::path p = kRoot / "corpus" / "rules" / "T-If" / "pos_both.dimp";
  Outcome a = run(p, cfg);
  Outcome b = run(p, cfg);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("{", 0), 0u);
}

TEST(Cli, FeatureFlagGatesExistsLoc) {
  fs::path p = kRoot / "corpus" / "djs" / "exists_loc.djs";
  EXPECT_EQ(run(p).code, 2);
  CliConfig cfg;
  cfg.exists_loc = true;
  EXPECT_EQ(run(p, cfg).code, 0);
}

TEST(Cli, ExternalSolverAgrees) {
  if (!have_z3()) GTEST_SKIP() << "z3 not installed";
  int n = 0;
  for (auto& e : fs::recursive_directory_iterator(kRoot / "corpus" / "rules")) {
    if (e.path().extension() != ".dimp") continue;
    std::ifstream in(e.path());
    std::string first;
    std::getline(in, first);
    std::string second;
    std::getline(in, second);
    if (first.find("prelude") != std::string::npos || second.find("prelude") != std::string::npos) continue;
    if (first.find("static-loc") != std::string::npos || second.find("static-loc") != std::string::npos) continue;
    CliConfig internal;
    CliConfig external;
    external.solver = "external:/usr/local/bin/z3";
    EXPECT_EQ(run(e.path(), internal).code, run(e.path(), external).code) << e.path();
    if (++n == 20) break;
  }
  EXPECT_EQ(n, 20);
}

TEST(Cli, DjsCorpusVerdicts) {
  const std::map<std::string, int> codes = {{"ok", 0}, {"parse", 2}, {"wf", 3}, {"type", 4}};
  int n = 0;
  for (auto& e : fs::directory_iterator(kRoot / "corpus" / "djs")) {
    if (e.path().extension() != ".djs") continue;
    std::ifstream in(e.path());
    CliConfig cfg;
    int expected = -1;
    for (std::string line; std::getline(in, line) && line.rfind("//", 0) == 0;) {
      if (line.find("feature: exists-loc") != std::string::npos) cfg.exists_loc = true;
      auto p = line.find("expect: ");
      if (p != std::string::npos) expected = codes.at(line.substr(p + 8));
    }
    ASSERT_NE(expected, -1) << e.path();
    Outcome r = run(e.path(), cfg);
    EXPECT_EQ(r.code, expected) << e.path() << "\n" << r.err;
    ++n;
  }
  EXPECT_GE(n, 9);
}
