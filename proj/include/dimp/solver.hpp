#pragma once

// Validity oracles for quantifier-free obligations ⟨Γ⟩ ⇒ p.
//
// Both backends see the same ground problem: every value is an integer,
// non-integer constants are pairwise distinct integer constants, has-type and
// heap-has atoms are opaque predicates, and a fixed set of ground lemmas
// (truthiness, tuple selection, read-over-write) is instantiated up front.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dimp/syntax.hpp"

namespace dimp {

enum class Verdict { Valid, Invalid, Unknown };
const char* to_string(Verdict v);

struct Obligation {
  std::vector<Form> hyps;
  Form goal;
};

struct OracleResult {
  Verdict verdict = Verdict::Unknown;
  std::string model;   // countermodel for Invalid (internal oracle)
  std::string detail;  // reason for Unknown
};

// -----------------------------------------------------------------------------
// Ground problem shared by both backends

struct GTerm {
  enum class Kind { Int, Const, Var, App, Add, Sub };
  Kind kind = Kind::Var;
  std::int64_t value = 0;
  std::string sym;  // Const/Var/App symbol
  std::vector<int> args;
};

struct GForm {
  enum class Kind { True, False, Eq, Pred, Not, And, Or };
  Kind kind = Kind::True;
  std::string sym;        // Pred: "<", "<=", ">", ">=" are interpreted
  std::vector<int> args;  // Eq/Pred: term ids; Not/And/Or: formula ids
};

struct Problem {
  std::vector<GTerm> terms;
  std::vector<GForm> forms;
  std::vector<int> hyps;
  std::vector<int> lemmas;
  int goal = -1;
  // Readable names for opaque type predicates, for the SMT-LIB header.
  std::vector<std::pair<std::string, std::string>> legend;

  int term(GTerm t);
  int form(GForm f);

 private:
  std::map<std::string, int> term_index_;
  std::map<std::string, int> form_index_;
};

Problem encode(const Obligation& ob);

bool is_arith_pred(const std::string& sym);

// Deterministic SMT-LIB v2 script; unsat ⇔ Valid.
std::string emit_smtlib(const Obligation& ob);
std::string emit_smtlib(const Problem& p);

// -----------------------------------------------------------------------------
// Backends

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual OracleResult check(const Obligation& ob) = 0;
  virtual std::string name() const = 0;
};

class InternalOracle : public Oracle {
 public:
  // Bound on nested theory case splits (disequalities, equality sharing).
  static constexpr int kMaxSplitDepth = 8;
  // Bound on boolean search nodes per obligation.
  static constexpr int kMaxNodes = 20000;

  OracleResult check(const Obligation& ob) override;
  OracleResult check(const Problem& p);
  std::string name() const override { return "internal"; }
};

class ExternalOracle : public Oracle {
 public:
  ExternalOracle(std::string path, int timeout_ms) : path_(std::move(path)), timeout_ms_(timeout_ms) {}
  OracleResult check(const Obligation& ob) override;
  OracleResult run_script(const std::string& script) const;
  std::string name() const override { return "external:" + path_; }

 private:
  std::string path_;
  int timeout_ms_;
};

// Records every obligation and verdict passing through `inner`.
class RecordingOracle : public Oracle {
 public:
  struct Entry {
    std::string smtlib;
    Verdict verdict;
  };
  explicit RecordingOracle(std::shared_ptr<Oracle> inner) : inner_(std::move(inner)) {}
  OracleResult check(const Obligation& ob) override;
  std::string name() const override { return inner_->name(); }
  std::vector<Entry> entries() const;

 private:
  std::shared_ptr<Oracle> inner_;
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

struct SolverConfig {
  bool external = false;
  std::string path;
  int timeout_ms = 2000;
};

// Parses "internal" or "external:<path>". DIMP_SOLVER overrides the path of
// an external solver.
SolverConfig parse_solver_spec(const std::string& spec, int timeout_ms);
std::shared_ptr<Oracle> make_oracle(const SolverConfig& config);

}  // namespace dimp
