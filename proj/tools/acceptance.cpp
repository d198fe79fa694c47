#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

#include "dimp/checker.hpp"
#include "dimp/djs.hpp"
#include "dimp/driver.hpp"
#include "dimp/logic.hpp"
#include "dimp/parser.hpp"
#include "dimp/printer.hpp"
#include "dimp/solver.hpp"
#include "dimp/subtype.hpp"
#include "dimp/wf.hpp"

using namespace dimp;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = DIMP_SOURCE_DIR;
const char* kZ3 = "/usr/local/bin/z3";

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Obligations emitted while checking corpus programs, with the internal
// verdict.
std::vector<RecordingOracle::Entry> g_obligations;

// ---------------------------------------------------------------------------
// Running corpus programs

struct Header {
  std::string expect = "ok";
  bool prelude = false;
  bool exists_loc = false;
  std::vector<std::pair<std::string, std::string>> static_locs;
};

Header read_header(const std::string& text) {
  Header h;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line) && (line.rfind(";", 0) == 0 || line.rfind("//", 0) == 0)) {
    std::istringstream ls(line.substr(line[0] == ';' ? 1 : 2));
    std::string key;
    ls >> key;
    if (key == "expect:") ls >> h.expect;
    if (key == "prelude") h.prelude = true;
    if (key == "feature:") {
      std::string f;
      ls >> f;
      h.exists_loc = h.exists_loc || f == "exists-loc";
    }
    if (key == "static-loc:") {
      std::string r, l;
      ls >> r >> l;
      h.static_locs.emplace_back(r, l);
    }
  }
  return h;
}

int expected_code(const std::string& e) {
  if (e == "ok") return 0;
  if (e == "parse") return 2;
  if (e == "wf") return 3;
  return 4;
}

struct RunResult {
  int code = 0;
  std::string message;
};

RunResult run_program(const std::string& text, bool is_djs, const Header& h) {
  ParseOptions po;
  po.exists_loc = h.exists_loc;
  po.runtime_locs = !h.static_locs.empty();
  DriverOptions opts;
  opts.check.exists_loc = h.exists_loc;
  opts.record_obligations = true;
  try {
    Program p;
    if (h.prelude || is_djs) p = parse_program(slurp(kRoot / "prelude" / "objects.dimp"), po);
    Program body = is_djs ? desugar_program(text, po) : parse_program(text, po);
    p.decls.insert(p.decls.end(), body.decls.begin(), body.decls.end());
    Parser parser(po);
    for (auto& [r, l] : h.static_locs) opts.static_locs[parser.location(read_one(r))] = parser.location(read_one(l));
    ProgramResult res = check_program(p, opts);
    RunResult out{res.exit_code(), {}};
    for (auto& d : res.defs) {
      g_obligations.insert(g_obligations.end(), d.obligations.begin(), d.obligations.end());
      if (d.error && out.message.empty()) out.message = d.error->what();
    }
    if (res.decl_error && out.message.empty()) out.message = res.decl_error->what();
    return out;
  } catch (Error& e) {
    return {exit_code(e), e.what()};
  }
}

// ---------------------------------------------------------------------------
// Criteria

Outcome rule_coverage() {
  static const std::vector<std::string> kRules = {
      "T-Const", "T-Var",   "T-Loc",    "T-Extend", "T-Fun",   "T-Val",   "T-Sub",    "T-Let",   "T-If",    "T-App",
      "T-As",    "T-Ref",   "T-Deref",  "T-Setref", "T-NewObj", "T-Thaw", "T-Freeze", "T-Label", "T-Break"};
  Outcome o;
  int files = 0, passed = 0;
  for (auto& rule : kRules) {
    fs::path dir = kRoot / "corpus" / "rules" / rule;
    int pos = 0, neg = 0;
    if (!fs::exists(dir)) {
      o.pass = false;
      o.detail += " missing " + rule + ";";
      continue;
    }
    std::vector<fs::path> paths;
    for (auto& e : fs::directory_iterator(dir)) paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (auto& p : paths) {
      std::string text = slurp(p);
      Header h = read_header(text);
      (h.expect == "ok" ? pos : neg)++;
      RunResult r = run_program(text, false, h);
      ++files;
      if (r.code == expected_code(h.expect)) {
        ++passed;
      } else {
        o.pass = false;
        o.detail += " " + rule + "/" + p.filename().string() + " got exit " + std::to_string(r.code) + ";";
      }
    }
    if (pos < 2 || neg < 2) {
      o.pass = false;
      o.detail += " " + rule + " has " + std::to_string(pos) + " positive and " + std::to_string(neg) + " negative;";
    }
  }
  o.detail = std::to_string(passed) + "/" + std::to_string(files) + " programs over " +
             std::to_string(kRules.size()) + " rules" + o.detail;
  return o;
}

Outcome worked_examples() {
  Outcome o;
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  {
    FreshScope scope;
    HeapType h = parse_heap("(heap H0 (bind l1 x {v | (T1 v)}) (bind l2 y {v | (T2 v)}))");
    check(embed_heap(h).str() == "<x:Top>, <y:Top>, (T1 x), (T2 y)", "heap embedding");
  }
  {
    Form p = parse_formula("(:: w A)");
    Ty t = parse_type("{x | (P x)}");
    check(to_string(tinst(p, Name("A"), t)) == "(P w)", "TInst on the instantiated variable");
    check(to_string(tinst(parse_formula("(:: w B)"), Name("A"), t)) == "(:: w B)", "TInst on another variable");
  }
  {
    Checker c(std::make_shared<InternalOracle>());
    Walk b = parse_walk("b");
    auto join = [&](const char* s1, const char* h1, const char* s2, const char* h2) {
      FreshScope scope;
      TypedResult r = c.join(b, {parse_type(s1), Parser().heap_env(read_one(h1))},
                             {parse_type(s2), Parser().heap_env(read_one(h2))});
      return to_string(r.type) + " / " + to_string(r.heap);
    };
    auto guard = [&](const std::string& a, const std::string& b2) {
      return "{v | (and (=> (= b true) " + a + ") (=> (= b false) " + b2 + "))}";
    };
    check(join("{v | (= v 1)}", "(heapenv H)", "{v | (= v 2)}", "(heapenv H)") ==
              guard("(= v 1)", "(= v 2)") + " / (heapenv H)",
          "JoinTypes of refinements");
    check(join("(exists x {x | (Int x)} {v | (= v x)})", "(heapenv H)", "{v | (= v 2)}", "(heapenv H)") ==
              "(exists x " + guard("(Int v)", "true") + " " + guard("(= v x)", "(= v 2)") + ") / (heapenv H)",
          "JoinTypes with a left existential");
    check(join("{v | (= v 2)}", "(heapenv H)", "(exists y {y | (Int y)} {v | (= v y)})", "(heapenv H)") ==
              "(exists y " + guard("true", "(Int v)") + " " + guard("(= v 2)", "(= v y)") + ") / (heapenv H)",
          "JoinTypes with a right existential");
    check(join("(exists x {x | (Int x)} {v | (= v x)})", "(heapenv H)", "(exists y {y | (Int y)} {v | (= v y)})",
               "(heapenv H)") == "(exists x " + guard("(Int v)", "true") + " (exists y " + guard("true", "(Int v)") +
                                      " " + guard("(= v x)", "(= v y)") + ")) / (heapenv H)",
          "JoinTypes with existentials on both sides");
    std::regex both(R"(\(exists (y\$\d+) \{v \| \(and \(=> \(= b true\) \(= v 1\)\) \(=> \(= b false\) \(= v 2\)\)\)\} .*\) / \(heapenv H \(val l \1\)\))");
    check(std::regex_match(join("{v | true}", "(heapenv H (val l 1))", "{v | true}", "(heapenv H (val l 2))"), both),
          "JoinHeaps with l in both heaps");
    std::regex left(R"(\(exists (y\$\d+) \{v \| \(and \(=> \(= b true\) \(= v 1\)\) \(=> \(= b false\) true\)\)\} .*\) / \(heapenv H \(val l \1\)\))");
    check(std::regex_match(join("{v | true}", "(heapenv H (val l 1))", "{v | true}", "(heapenv H)"), left),
          "JoinHeaps with l only on the left");
    std::regex right(R"(\(exists (y\$\d+) \{v \| \(and \(=> \(= b true\) true\) \(=> \(= b false\) \(= v 2\)\)\)\} .*\) / \(heapenv H \(val l \1\)\))");
    check(std::regex_match(join("{v | true}", "(heapenv H)", "{v | true}", "(heapenv H (val l 2))"), right),
          "JoinHeaps with l only on the right");
  }
  {
    fs::path djs = kRoot / "corpus" / "djs" / "exists_loc.djs";
    std::string text = slurp(djs);
    ParseOptions po;
    po.exists_loc = true;
    try {
      Program p = desugar_program(text, po);
      TypeEnv env;
      env = env.heapvar(Name("H0"));
      const Decl& d = p.decls.back();
      wf_type(env, d.type);
      check(d.type->node.index() == 0, "f' annotation is a refinement");
    } catch (Error& e) {
      check(false, std::string("f' annotation: ") + e.what());
    }
    Header h;
    h.exists_loc = true;
    RunResult with = run_program(text, true, h);
    check(with.code == 0, "f' checks with exists-loc: " + with.message);
    h.exists_loc = false;
    RunResult without = run_program(text, true, h);
    check(without.code == 2, "f' annotation needs the exists-loc feature");
  }
  o.pass = failed.empty();
  o.detail = "embedding, TInst x2, join x7, f'";
  for (auto& f : failed) o.detail += "; failed: " + f;
  return o;
}

// Thaw/freeze sequences over two weak locations.
Outcome thaw_freeze() {
  std::mt19937 rng(1234);
  enum Op { Thaw, Freeze, StoreGood, StoreBad };
  const int kSequences = 200;
  int agree = 0, accepted = 0;
  std::string disagreement;
  for (int n = 0; n < kSequences; ++n) {
    int len = std::uniform_int_distribution<int>(0, 8)(rng);
    std::vector<std::pair<Op, int>> ops;
    for (int i = 0; i < len; ++i) {
      ops.emplace_back(static_cast<Op>(std::uniform_int_distribution<int>(0, 3)(rng)),
                       std::uniform_int_distribution<int>(0, 1)(rng));
    }
    // Sequence oracle: frzn (thwd frzn)* with a store-preserved invariant at
    // every freeze.
    bool ok = true;
    for (int loc = 0; loc < 2; ++loc) {
      bool thawed = false, good = true;
      for (auto& [op, l] : ops) {
        if (l != loc) continue;
        switch (op) {
          case Thaw:
            ok = ok && !thawed;
            thawed = true;
            good = true;
            break;
          case Freeze:
            ok = ok && thawed && good;
            thawed = false;
            break;
          case StoreGood:
          case StoreBad:
            ok = ok && thawed;
            good = op == StoreGood;
            break;
        }
      }
      ok = ok && !thawed;
    }
    // D_imp program
    std::string body = "undefined";
    std::vector<std::string> parts;
    std::string alias[2] = {"", ""}, aliasloc[2] = {"", ""};
    const char* ref[2] = {"ra", "rb"};
    const char* weak[2] = {"~wa", "~wb"};
    for (std::size_t i = 0; i < ops.size(); ++i) {
      auto [op, l] = ops[i];
      std::string target = alias[l].empty() ? ref[l] : alias[l];
      switch (op) {
        case Thaw:
          alias[l] = "t" + std::to_string(i);
          aliasloc[l] = "lt" + std::to_string(i);
          parts.push_back("(let " + alias[l] + " (thaw " + aliasloc[l] + " " + ref[l] + ")");
          break;
        case Freeze:
          parts.push_back("(let _ (freeze " + std::string(weak[l]) + " (thwd " +
                          (aliasloc[l].empty() ? std::string("lnone") : aliasloc[l]) + ") " + target + ")");
          break;
        case StoreGood: parts.push_back("(let _ (setref " + target + " 5)"); break;
        case StoreBad: parts.push_back("(let _ (setref " + target + " \"s\")"); break;
      }
    }
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) body = *it + " " + body + ")";
    std::string heap = "(heap H (weak ~wa frzn) (weak ~wb frzn))";
    std::string prog =
        "(initial-heap (heap H0 (bind lp p {p | (Dict p)} lroot)))\n"
        "(weak ~wa {v | (Int v)} lp)\n(weak ~wb {v | (Int v)} lp)\n"
        "(assume ra {v | (and (:: v (Ref ~wa)) (!= v null))})\n"
        "(assume rb {v | (and (:: v (Ref ~wb)) (!= v null))})\n"
        "(define f {v | (:: v (-> () () (H) (world u Top " + heap + ") (world r Top " + heap + ")))}\n"
        "  (fun (u) " + body + "))\n";
    RunResult r = run_program(prog, false, Header{});
    bool checker_ok = r.code == 0;
    accepted += checker_ok;
    if (checker_ok == ok) {
      ++agree;
    } else if (disagreement.empty()) {
      disagreement = "; first disagreement (oracle " + std::string(ok ? "accepts" : "rejects") + "): " + body +
                     " :: " + r.message;
    }
  }
  Outcome o;
  o.pass = agree == kSequences && accepted > 0 && accepted < kSequences;
  o.detail = std::to_string(agree) + "/" + std::to_string(kSequences) + " sequences agree with the oracle (" +
             std::to_string(accepted) + " accepted) on each of 2 weak locations" + disagreement;
  return o;
}

// Random well-formed types over Γ = H, A, L, n:Int, k:Int.
class TypeGen {
 public:
  explicit TypeGen(std::mt19937& rng) : rng_(rng) {}

  std::string type(int depth, std::vector<std::string> scope) {
    int pick = pick_n(depth > 0 ? 4 : 2);
    std::string v = fresh("v");
    if (pick == 2) {
      std::string x = fresh("x");
      std::string bound = type(depth - 1, scope);
      scope.push_back(x);
      return "(exists " + x + " " + bound + " " + type(depth - 1, scope) + ")";
    }
    scope.push_back(v);
    if (pick == 3) return "{" + v + " | (:: " + v + " " + term(depth - 1, scope) + ")}";
    return "{" + v + " | " + formula(std::min(depth, 2), v, scope) + "}";
  }

 private:
  int pick_n(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  std::string fresh(const char* base) { return std::string(base) + std::to_string(counter_++); }

  std::string walk(const std::vector<std::string>& scope) {
    switch (pick_n(5)) {
      case 0: return std::to_string(pick_n(7) - 3);
      case 1: return "\"s" + std::to_string(pick_n(3)) + "\"";
      case 2: return "(sel " + scope[pick_n(static_cast<int>(scope.size()))] + " 0)";
      default: return scope[pick_n(static_cast<int>(scope.size()))];
    }
  }

  std::string formula(int depth, const std::string& v, const std::vector<std::string>& scope) {
    if (depth <= 0 || pick_n(3) == 0) {
      switch (pick_n(6)) {
        case 0: return "(= " + v + " " + walk(scope) + ")";
        case 1: return "(< " + walk(scope) + " " + walk(scope) + ")";
        case 2: return "(Int " + v + ")";
        case 3: return "(P " + v + " " + walk(scope) + ")";
        case 4: return "(:: " + v + " (Ref l" + std::to_string(pick_n(2)) + "))";
        default: return pick_n(2) ? "true" : "(!= " + v + " null)";
      }
    }
    switch (pick_n(4)) {
      case 0: return "(and " + formula(depth - 1, v, scope) + " " + formula(depth - 1, v, scope) + ")";
      case 1: return "(or " + formula(depth - 1, v, scope) + " " + formula(depth - 1, v, scope) + ")";
      case 2: return "(not " + formula(depth - 1, v, scope) + ")";
      default: return "(=> " + formula(depth - 1, v, scope) + " " + formula(depth - 1, v, scope) + ")";
    }
  }

  std::string term(int depth, const std::vector<std::string>& scope) {
    switch (depth <= 0 ? pick_n(3) : pick_n(5)) {
      case 0: return "(Ref l" + std::to_string(pick_n(2)) + ")";
      case 1: return pick_n(2) ? "A" : "Null";
      case 2: return "(Ref L)";
      case 3: return "(Array " + type(depth - 1, scope) + ")";
      default: {
        std::string x = fresh("a"), y = fresh("r"), b = fresh("b");
        std::vector<std::string> in = scope;
        in.push_back(x);
        in.push_back(b);
        std::vector<std::string> out = in;
        out.push_back(y);
        std::string K = fresh("K");
        return "(-> () (M) (" + K + ") (world " + x + " " + type(depth - 1, scope) + " (heap " + K + " (bind M " + b +
               " " + type(depth - 1, in) + "))) (world " + y + " " + type(depth - 1, in) + " (heap " + K + ")))";
      }
    }
  }

  std::mt19937& rng_;
  int counter_ = 0;
};

TypeEnv base_env() {
  TypeEnv env;
  env = env.heapvar(Name("H")).tyvar(Name("A")).locvar(Location::var(Name("L")));
  env = env.bind(Name("n"), parse_type("{v | (Int v)}")).bind(Name("k"), parse_type("{v | (Int v)}"));
  return env;
}

Outcome subtyping() {
  std::mt19937 rng(99);
  TypeGen gen(rng);
  TypeEnv env = base_env();
  int refl = 0, generated = 0;
  std::string first;
  while (generated < 500) {
    FreshScope scope;
    std::string text = gen.type(std::uniform_int_distribution<int>(0, 4)(rng), {"n", "k"});
    Ty t;
    try {
      t = parse_type(text);
      wf_type(env, t);
    } catch (Error& e) {
      if (first.empty()) first = "; generator produced an ill-formed type: " + text + " :: " + e.what();
      ++generated;
      continue;
    }
    ++generated;
    try {
      Prover p(std::make_shared<InternalOracle>());
      p.sub_type(env, t, t);
      ++refl;
    } catch (Error& e) {
      if (first.empty()) first = "; reflexivity failed on " + text + " :: " + e.what();
    }
  }
  int identity = 0, perms = 0;
  for (int n = 0; n < 50; ++n) {
    FreshScope scope;
    int k = std::uniform_int_distribution<int>(2, 5)(rng);
    std::vector<std::string> binds;
    for (int i = 0; i < k; ++i) {
      std::string ty = i > 0 && std::uniform_int_distribution<int>(0, 1)(rng)
                           ? "{z | (= z (+ y" + std::to_string(i - 1) + " 1))}"
                           : "{z | (Int z)}";
      binds.push_back("(bind c" + std::to_string(i) + " y" + std::to_string(i) + " " + ty + ")");
    }
    auto heap_text = [&](const std::vector<std::string>& bs) {
      std::string s = "(heap H";
      for (auto& b : bs) s += " " + b;
      return s + ")";
    };
    std::vector<std::string> shuffled = binds;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    HeapType h = parse_heap(heap_text(binds));
    Subst id = match_heaps(h, h);
    bool is_id = true;
    for (int i = 0; i < k; ++i) {
      Name y("y" + std::to_string(i));
      auto it = id.terms.find(y);
      is_id = is_id && it != id.terms.end() && to_string(it->second) == y.str();
    }
    identity += is_id;
    World w1 = parse_world("(world x {x | (Int x)} " + heap_text(binds) + ")");
    World w2 = parse_world("(world x {x | (Int x)} " + heap_text(shuffled) + ")");
    try {
      Prover p(std::make_shared<InternalOracle>());
      p.sub_world(env, w1, w2);
      p.sub_world(env, w2, w1);
      ++perms;
    } catch (Error& e) {
      if (first.empty()) first = "; permuted world subtyping failed: " + std::string(e.what());
    }
  }
  Outcome o;
  o.pass = refl == 500 && identity == 50 && perms == 50;
  o.detail = "reflexivity " + std::to_string(refl) + "/500, heap self-match identity " + std::to_string(identity) +
             "/50, permuted worlds " + std::to_string(perms) + "/50" + first;
  return o;
}

bool eval(const Form& p, unsigned assignment) {
  return std::visit(
      [&](const auto& n) -> bool {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, FTrue>) return true;
        if constexpr (std::is_same_v<N, FFalse>) return false;
        if constexpr (std::is_same_v<N, FPred>) return (assignment >> (n.name[1] - '1')) & 1;
        if constexpr (std::is_same_v<N, FAnd>) {
          return std::all_of(n.items.begin(), n.items.end(), [&](const Form& f) { return eval(f, assignment); });
        }
        if constexpr (std::is_same_v<N, FOr>) {
          return std::any_of(n.items.begin(), n.items.end(), [&](const Form& f) { return eval(f, assignment); });
        }
        if constexpr (std::is_same_v<N, FNot>) return !eval(n.body, assignment);
        if constexpr (std::is_same_v<N, FImplies>) return !eval(n.lhs, assignment) || eval(n.rhs, assignment);
        if constexpr (std::is_same_v<N, FIte>) {
          return eval(n.cond, assignment) ? eval(n.then_f, assignment) : eval(n.else_f, assignment);
        }
        throw std::logic_error("unexpected formula");
      },
      p->node);
}

Form random_formula(std::mt19937& rng, int depth) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  if (depth == 0 || pick(4) == 0) {
    int a = pick(10);
    if (a == 8) return mk::tru();
    if (a == 9) return mk::fls();
    return mk::pred("p" + std::to_string(a % 4 + 1), {});
  }
  switch (pick(5)) {
    case 0: return mk::conj({random_formula(rng, depth - 1), random_formula(rng, depth - 1)});
    case 1: return mk::disj({random_formula(rng, depth - 1), random_formula(rng, depth - 1), random_formula(rng, depth - 1)});
    case 2: return mk::neg(random_formula(rng, depth - 1));
    case 3: return mk::implies(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    default: return mk::ite(random_formula(rng, depth - 1), random_formula(rng, depth - 1), random_formula(rng, depth - 1));
  }
}

Outcome cnf_equivalence() {
  std::mt19937 rng(7);
  int equal = 0;
  std::string first;
  for (int n = 0; n < 300; ++n) {
    Form p = random_formula(rng, 5);
    std::vector<Clause> cs = cnf(p);
    bool same = true;
    for (unsigned a = 0; a < 16; ++a) {
      bool lhs = eval(p, a);
      bool rhs = std::all_of(cs.begin(), cs.end(), [&](const Clause& c) { return eval(clause_formula(c), a); });
      same = same && lhs == rhs;
    }
    equal += same;
    if (!same && first.empty()) first = "; mismatch on " + to_string(p);
  }
  Outcome o;
  o.pass = equal == 300;
  o.detail = std::to_string(equal) + "/300 formulas truth-table equivalent" + first;
  return o;
}

Outcome oracle_differential() {
  Outcome o;
  if (!fs::exists(kZ3)) {
    o.pass = false;
    o.detail = "external solver not found at " + std::string(kZ3);
    return o;
  }
  ExternalOracle z3(kZ3, 5000);
  int total = 0, unknown = 0, agree = 0, decided = 0;
  std::string first;
  std::set<std::string> seen;
  for (auto& e : g_obligations) {
    if (!seen.insert(e.smtlib).second) continue;
    ++total;
    if (e.verdict == Verdict::Unknown) {
      ++unknown;
      continue;
    }
    OracleResult ext = z3.run_script(e.smtlib);
    if (ext.verdict == Verdict::Unknown) continue;
    ++decided;
    if (ext.verdict == e.verdict) {
      ++agree;
    } else if (first.empty()) {
      first = "; disagreement: internal " + std::string(to_string(e.verdict)) + ", external " +
              to_string(ext.verdict) + "\n" + e.smtlib;
    }
  }
  double rate = total ? static_cast<double>(unknown) / total : 1.0;
  o.pass = total >= 200 && agree == decided && rate <= 0.20;
  std::ostringstream ss;
  ss << total << " distinct obligations, " << agree << "/" << decided << " decided verdicts agree, unknown rate "
     << static_cast<int>(rate * 1000) / 10.0 << "%" << first;
  o.detail = ss.str();
  return o;
}

Outcome desugar_goldens() {
  static const std::vector<std::string> kRules = {"DS-Func", "DS-Ctor", "DS-Return", "DS-While",
                                                  "DS-Break", "DS-Thaw", "DS-Freeze", "DS-Assert"};
  Outcome o;
  int ok = 0;
  for (auto& r : kRules) {
    fs::path src = kRoot / "corpus" / "desugar" / (r + ".djs");
    fs::path golden = kRoot / "corpus" / "desugar" / (r + ".golden");
    try {
      std::string got = to_pretty(desugar_program(slurp(src)));
      if (got == slurp(golden)) {
        ++ok;
      } else {
        o.detail += "; " + r + " differs from its golden";
      }
    } catch (Error& e) {
      o.detail += "; " + r + ": " + e.what();
    }
  }
  o.pass = ok == static_cast<int>(kRules.size());
  o.detail = std::to_string(ok) + "/" + std::to_string(kRules.size()) + " goldens match" + o.detail;
  return o;
}

Outcome label_discipline() {
  RunResult unbound = run_program("(define k {v | true} (break nowhere 1))", false, Header{});
  RunResult crossing = run_program(
      "(define k {v | true} (label out (world r Top (heap H0))"
      " (as (fun (x) (break out x)) {v | (:: v (-> () () (H) (world x Top (heap H)) (world y Top (heap H))))})))",
      false, Header{});
  RunResult bound = run_program(
      "(define k {v | (= v 1)} (label out (world r {r | (= r 1)} (heap H0)) (break out 1)))", false, Header{});
  Outcome o;
  bool distinct = unbound.message.find("unbound label") != std::string::npos &&
                  crossing.message.find("crosses a function boundary") != std::string::npos;
  o.pass = unbound.code == 4 && crossing.code == 4 && distinct && bound.code == 0;
  o.detail = "unbound: \"" + unbound.message.substr(0, unbound.message.find('\n')) + "\"; crossing: \"" +
             crossing.message.substr(0, crossing.message.find('\n')) + "\"";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  // The differential runs last so it sees every obligation emitted above.
  std::vector<Criterion> criteria = {
      {"rule-coverage corpus", rule_coverage},
      {"worked-example fidelity", worked_examples},
      {"thaw/freeze state machine", thaw_freeze},
      {"subtyping properties", subtyping},
      {"CNF equivalence", cnf_equivalence},
      {"desugaring goldens", desugar_goldens},
      {"label discipline", label_discipline},
      {"oracle differential", oracle_differential},
  };
  // Extra obligations for the differential come from the DJS corpus.
  for (auto& e : fs::directory_iterator(kRoot / "corpus" / "djs")) {
    if (e.path().extension() != ".djs") continue;
    std::string text = slurp(e.path());
    run_program(text, true, read_header(text));
  }
  int failures = 0;
  auto start = std::chrono::steady_clock::now();
  for (auto& c : criteria) {
    Outcome o = c.run();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << o.detail << std::endl;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << "(" << criteria.size() - failures << "/" << criteria.size()
            << " criteria, " << static_cast<int>(secs * 10) / 10.0 << " s)" << std::endl;
  return failures ? 1 : 0;
}
