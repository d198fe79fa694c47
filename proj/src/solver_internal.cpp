#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "dimp/solver.hpp"

namespace dimp {

namespace {

using boost::multiprecision::cpp_int;

constexpr std::size_t kFmLimit = 4000;

cpp_int floor_div(const cpp_int& a, const cpp_int& b) {
  cpp_int q = a / b;
  cpp_int r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

cpp_int ceil_div(const cpp_int& a, const cpp_int& b) { return -floor_div(-a, b); }

cpp_int gcd(cpp_int a, cpp_int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    cpp_int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// ---------------------------------------------------------------------------
// Linear integer arithmetic: Gaussian elimination of equalities, then
// Fourier-Motzkin with integer tightening. Sound for unsatisfiability; models
// are built by back-substitution and may be unavailable.

struct Lin {
  std::map<int, cpp_int> coef;  // sum coef*x  (<= | =)  c
  cpp_int c;

  std::string key() const {
    std::string k;
    for (auto& [v, a] : coef) k += std::to_string(v) + ":" + a.str() + ",";
    return k + "|" + c.str();
  }
};

enum class FmStatus { Sat, Unsat, Unknown };

struct FmResult {
  FmStatus status = FmStatus::Unknown;
  std::map<int, cpp_int> values;
};

Lin combine(const Lin& a, const cpp_int& ka, const Lin& b, const cpp_int& kb) {
  Lin out;
  for (auto& [v, x] : a.coef) out.coef[v] += ka * x;
  for (auto& [v, x] : b.coef) out.coef[v] += kb * x;
  for (auto it = out.coef.begin(); it != out.coef.end();) {
    it = it->second == 0 ? out.coef.erase(it) : std::next(it);
  }
  out.c = ka * a.c + kb * b.c;
  return out;
}

// Returns false when the constraint is trivially unsatisfiable.
bool normalize(Lin& l, bool equality) {
  cpp_int g = 0;
  for (auto& [v, a] : l.coef) g = gcd(g, a);
  if (g == 0) return equality ? l.c == 0 : l.c >= 0;
  for (auto& [v, a] : l.coef) a /= g;
  if (equality) {
    if (l.c % g != 0) return false;
    l.c /= g;
  } else {
    l.c = floor_div(l.c, g);
  }
  return true;
}

struct Step {
  int var;
  bool equality;
  std::vector<Lin> constraints;
};

FmResult fourier_motzkin(std::vector<Lin> eqs, std::vector<Lin> ineqs, bool want_model) {
  std::vector<Step> steps;
  for (auto& l : eqs) {
    if (!normalize(l, true)) return {FmStatus::Unsat, {}};
  }
  for (auto& l : ineqs) {
    if (!normalize(l, false)) return {FmStatus::Unsat, {}};
  }
  while (!eqs.empty()) {
    Lin e = eqs.back();
    eqs.pop_back();
    if (!normalize(e, true)) return {FmStatus::Unsat, {}};
    if (e.coef.empty()) continue;
    auto pick = e.coef.begin();
    for (auto it = e.coef.begin(); it != e.coef.end(); ++it) {
      if (abs(it->second) < abs(pick->second)) pick = it;
    }
    int x = pick->first;
    cpp_int a = pick->second;
    cpp_int abs_a = abs(a);
    cpp_int sign = a > 0 ? 1 : -1;
    auto eliminate = [&](Lin& d, bool equality) {
      auto it = d.coef.find(x);
      if (it == d.coef.end()) return true;
      cpp_int b = it->second;
      d = combine(d, abs_a, e, -sign * b);
      return normalize(d, equality);
    };
    for (auto& d : eqs) {
      if (!eliminate(d, true)) return {FmStatus::Unsat, {}};
    }
    for (auto& d : ineqs) {
      if (!eliminate(d, false)) return {FmStatus::Unsat, {}};
    }
    steps.push_back({x, true, {e}});
  }
  while (true) {
    std::map<int, std::pair<std::size_t, std::size_t>> occ;
    for (auto& l : ineqs) {
      for (auto& [v, a] : l.coef) {
        if (a > 0) ++occ[v].first;
        else ++occ[v].second;
      }
    }
    if (occ.empty()) break;
    int x = occ.begin()->first;
    std::size_t best = SIZE_MAX;
    for (auto& [v, pn] : occ) {
      std::size_t cost = pn.first * pn.second;
      if (cost < best) {
        best = cost;
        x = v;
      }
    }
    std::vector<Lin> pos, neg, rest;
    for (auto& l : ineqs) {
      auto it = l.coef.find(x);
      if (it == l.coef.end()) rest.push_back(std::move(l));
      else if (it->second > 0) pos.push_back(std::move(l));
      else neg.push_back(std::move(l));
    }
    std::set<std::string> seen;
    for (auto& l : rest) seen.insert(l.key());
    for (auto& p : pos) {
      for (auto& n : neg) {
        cpp_int a = p.coef.at(x);
        cpp_int b = -n.coef.at(x);
        Lin r = combine(p, b, n, a);
        if (!normalize(r, false)) return {FmStatus::Unsat, {}};
        if (r.coef.empty()) continue;
        if (seen.insert(r.key()).second) rest.push_back(std::move(r));
      }
    }
    if (rest.size() > kFmLimit) return {FmStatus::Unknown, {}};
    Step s{x, false, {}};
    s.constraints = std::move(pos);
    s.constraints.insert(s.constraints.end(), std::make_move_iterator(neg.begin()),
                         std::make_move_iterator(neg.end()));
    steps.push_back(std::move(s));
    ineqs = std::move(rest);
  }
  FmResult out;
  out.status = FmStatus::Sat;
  if (!want_model) return out;
  auto value = [&](int v) -> cpp_int {
    auto it = out.values.find(v);
    if (it != out.values.end()) return it->second;
    out.values[v] = 0;
    return 0;
  };
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const Step& s = *it;
    if (s.equality) {
      const Lin& e = s.constraints[0];
      cpp_int rest = e.c;
      cpp_int a = 0;
      for (auto& [v, k] : e.coef) {
        if (v == s.var) a = k;
        else rest -= k * value(v);
      }
      if (rest % a != 0) return {FmStatus::Unknown, {}};
      out.values[s.var] = rest / a;
      continue;
    }
    std::optional<cpp_int> lo, hi;
    for (const Lin& l : s.constraints) {
      cpp_int rest = l.c;
      cpp_int a = 0;
      for (auto& [v, k] : l.coef) {
        if (v == s.var) a = k;
        else rest -= k * value(v);
      }
      if (a > 0) {
        cpp_int b = floor_div(rest, a);
        if (!hi || b < *hi) hi = b;
      } else {
        cpp_int b = ceil_div(rest, a);
        if (!lo || b > *lo) lo = b;
      }
    }
    if (lo && hi && *lo > *hi) return {FmStatus::Unknown, {}};
    cpp_int v = 0;
    if (lo && v < *lo) v = *lo;
    if (hi && v > *hi) v = *hi;
    out.values[s.var] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Theory of equality with uninterpreted functions, distinct constants and
// linear integer arithmetic over the ground problem.

struct Extras {
  std::vector<std::pair<int, int>> eqs;
  std::vector<std::pair<int, int>> neqs;
  std::vector<std::pair<int, int>> lts;  // first < second
};

using Literals = std::vector<std::pair<int, bool>>;  // (form id, value)

enum class TStatus { Sat, Unsat, Unknown };

struct TheoryResult {
  TStatus status = TStatus::Unknown;
  std::string model;
  std::string reason;
};

class Theory {
 public:
  explicit Theory(const Problem& p) : p_(p) {
    nterms_ = static_cast<int>(p.terms.size());
    int next = nterms_;
    pred_node_.assign(p.forms.size(), -1);
    for (std::size_t i = 0; i < p.forms.size(); ++i) {
      const GForm& f = p.forms[i];
      if (f.kind == GForm::Kind::Pred && !is_arith_pred(f.sym)) {
        pred_node_[i] = next;
        node_form_.push_back(static_cast<int>(i));
        ++next;
      }
    }
    top_ = next++;
    bot_ = next++;
    nnodes_ = next;
  }

  TheoryResult check(const Literals& lits, const Extras& extras, bool final, int depth) {
    State st(nnodes_);
    if (!closure(lits, extras, st)) return {TStatus::Unsat, {}, {}};
    FmResult fm = arithmetic(lits, extras, st, final);
    if (fm.status == FmStatus::Unsat) return {TStatus::Unsat, {}, {}};
    if (!final) return {TStatus::Sat, {}, {}};
    if (fm.status == FmStatus::Unknown) return {TStatus::Unknown, {}, "arithmetic model unavailable"};
    return complete(lits, extras, st, fm, depth);
  }

 private:
  struct State {
    explicit State(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::vector<int> parent;
    int find(int x) {
      while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
      }
      return x;
    }
    bool unite(int a, int b) {
      a = find(a);
      b = find(b);
      if (a == b) return false;
      if (a < b) std::swap(a, b);
      parent[a] = b;
      return true;
    }
  };

  std::string const_key(int t) const {
    const GTerm& g = p_.terms[t];
    if (g.kind == GTerm::Kind::Int) return "i:" + std::to_string(g.value);
    if (g.kind == GTerm::Kind::Const) return "c:" + g.sym;
    return {};
  }

  bool closure(const Literals& lits, const Extras& extras, State& st) {
    for (auto& [f, val] : lits) {
      const GForm& g = p_.forms[f];
      if (g.kind == GForm::Kind::Eq && val) st.unite(g.args[0], g.args[1]);
      if (pred_node_[f] >= 0) st.unite(pred_node_[f], val ? top_ : bot_);
    }
    for (auto& [a, b] : extras.eqs) st.unite(a, b);
    bool changed = true;
    while (changed) {
      changed = false;
      std::map<std::string, int> sigs;
      auto visit = [&](int node, const std::string& head, const std::vector<int>& args) {
        std::string sig = head;
        for (int a : args) sig += "," + std::to_string(st.find(a));
        auto [it, fresh] = sigs.emplace(sig, node);
        if (!fresh && st.unite(it->second, node)) changed = true;
      };
      for (int t = 0; t < nterms_; ++t) {
        const GTerm& g = p_.terms[t];
        if (g.kind == GTerm::Kind::App) visit(t, "a:" + g.sym, g.args);
        if (g.kind == GTerm::Kind::Add) visit(t, "+", g.args);
        if (g.kind == GTerm::Kind::Sub) visit(t, "-", g.args);
      }
      for (int f : node_form_) visit(pred_node_[f], "p:" + p_.forms[f].sym, p_.forms[f].args);
    }
    if (st.find(top_) == st.find(bot_)) return false;
    std::map<int, std::string> consts;
    for (int t = 0; t < nterms_; ++t) {
      std::string k = const_key(t);
      if (k.empty()) continue;
      auto [it, fresh] = consts.emplace(st.find(t), k);
      if (!fresh && it->second != k) return false;
    }
    for (auto& [f, val] : lits) {
      const GForm& g = p_.forms[f];
      if (g.kind == GForm::Kind::Eq && !val && st.find(g.args[0]) == st.find(g.args[1])) return false;
    }
    for (auto& [a, b] : extras.neqs) {
      if (st.find(a) == st.find(b)) return false;
    }
    return true;
  }

  // Classes that carry integer meaning.
  std::set<int> arith_classes(const Literals& lits, const Extras& extras, State& st) {
    std::set<int> out;
    for (int t = 0; t < nterms_; ++t) {
      const GTerm& g = p_.terms[t];
      if (g.kind == GTerm::Kind::Add || g.kind == GTerm::Kind::Sub) {
        out.insert(st.find(t));
        for (int a : g.args) out.insert(st.find(a));
      }
      if (g.kind == GTerm::Kind::Int) out.insert(st.find(t));
    }
    for (auto& [f, val] : lits) {
      const GForm& g = p_.forms[f];
      if (g.kind == GForm::Kind::Pred && is_arith_pred(g.sym)) {
        for (int a : g.args) out.insert(st.find(a));
      }
    }
    for (auto& [a, b] : extras.lts) {
      out.insert(st.find(a));
      out.insert(st.find(b));
    }
    return out;
  }

  FmResult arithmetic(const Literals& lits, const Extras& extras, State& st, bool want_model) {
    std::vector<Lin> eqs, ineqs;
    auto var = [&](int t) { return st.find(t); };
    for (int t = 0; t < nterms_; ++t) {
      const GTerm& g = p_.terms[t];
      if (g.kind == GTerm::Kind::Int) {
        Lin l;
        l.coef[var(t)] = 1;
        l.c = g.value;
        eqs.push_back(std::move(l));
      } else if (g.kind == GTerm::Kind::Add || g.kind == GTerm::Kind::Sub) {
        Lin l;
        l.coef[var(t)] += 1;
        l.coef[var(g.args[0])] -= 1;
        l.coef[var(g.args[1])] += g.kind == GTerm::Kind::Add ? -1 : 1;
        for (auto it = l.coef.begin(); it != l.coef.end();) {
          it = it->second == 0 ? l.coef.erase(it) : std::next(it);
        }
        l.c = 0;
        eqs.push_back(std::move(l));
      }
    }
    // a - b <= c
    auto diff = [&](int a, int b, long c) {
      Lin l;
      l.coef[var(a)] += 1;
      l.coef[var(b)] -= 1;
      for (auto it = l.coef.begin(); it != l.coef.end();) {
        it = it->second == 0 ? l.coef.erase(it) : std::next(it);
      }
      l.c = c;
      ineqs.push_back(std::move(l));
    };
    for (auto& [f, val] : lits) {
      const GForm& g = p_.forms[f];
      if (g.kind != GForm::Kind::Pred || !is_arith_pred(g.sym)) continue;
      int a = g.args[0];
      int b = g.args[1];
      std::string op = g.sym;
      if (!val) op = op == "<" ? ">=" : op == "<=" ? ">" : op == ">" ? "<=" : "<";
      if (op == "<") diff(a, b, -1);
      else if (op == "<=") diff(a, b, 0);
      else if (op == ">") diff(b, a, -1);
      else diff(b, a, 0);
    }
    for (auto& [a, b] : extras.lts) diff(a, b, -1);
    return fourier_motzkin(std::move(eqs), std::move(ineqs), want_model);
  }

  struct Branch {
    int a, b;
  };

  TheoryResult split(const Literals& lits, const Extras& extras, int depth, const Branch& br, bool equality) {
    if (depth >= InternalOracle::kMaxSplitDepth) return {TStatus::Unknown, {}, "split depth exhausted"};
    std::vector<Extras> options;
    if (equality) {
      Extras e1 = extras;
      e1.eqs.push_back({br.a, br.b});
      Extras e2 = extras;
      e2.neqs.push_back({br.a, br.b});
      options = {e1, e2};
    } else {
      Extras e1 = extras;
      e1.lts.push_back({br.a, br.b});
      Extras e2 = extras;
      e2.lts.push_back({br.b, br.a});
      options = {e1, e2};
    }
    bool unknown = false;
    std::string reason;
    for (auto& e : options) {
      TheoryResult r = check(lits, e, true, depth + 1);
      if (r.status == TStatus::Sat) return r;
      if (r.status == TStatus::Unknown) {
        unknown = true;
        reason = r.reason;
      }
    }
    if (unknown) return {TStatus::Unknown, {}, reason};
    return {TStatus::Unsat, {}, {}};
  }

  TheoryResult complete(const Literals& lits, const Extras& extras, State& st, const FmResult& fm, int depth) {
    std::set<int> arith = arith_classes(lits, extras, st);
    std::map<int, cpp_int> value;
    for (int c : arith) {
      auto it = fm.values.find(c);
      value[c] = it == fm.values.end() ? cpp_int(0) : it->second;
    }
    auto val = [&](int t) { return value.at(st.find(t)); };
    // Disequalities among integer classes.
    std::vector<std::pair<int, int>> neqs = extras.neqs;
    for (auto& [f, v] : lits) {
      const GForm& g = p_.forms[f];
      if (g.kind == GForm::Kind::Eq && !v) neqs.push_back({g.args[0], g.args[1]});
    }
    for (auto& [a, b] : neqs) {
      if (arith.count(st.find(a)) && arith.count(st.find(b)) && val(a) == val(b)) {
        return split(lits, extras, depth, {st.find(a), st.find(b)}, false);
      }
    }
    // Distinct constants that landed in integer classes.
    std::map<cpp_int, int> const_at;
    for (int t = 0; t < nterms_; ++t) {
      if (const_key(t).empty()) continue;
      int c = st.find(t);
      if (!arith.count(c)) continue;
      auto [it, fresh] = const_at.emplace(value[c], c);
      if (!fresh && it->second != c) return split(lits, extras, depth, {it->second, c}, false);
    }
    cpp_int fresh = 1000;
    for (auto& [c, v] : value) {
      if (abs(v) >= fresh) fresh = abs(v) + 1000;
    }
    for (int t = 0; t < nterms_; ++t) {
      int c = st.find(t);
      if (!value.count(c)) value[c] = fresh++;
    }
    // Congruence of the model: equal argument values must give equal results.
    std::map<std::string, std::pair<int, int>> table;
    auto key_of = [&](const std::string& head, const std::vector<int>& args) {
      std::string k = head;
      for (int a : args) k += "," + val(a).str();
      return k;
    };
    auto conflict_pair = [&](int n1, int n2, const std::vector<int>& a1,
                             const std::vector<int>& a2) -> std::optional<Branch> {
      (void)n1;
      (void)n2;
      for (std::size_t i = 0; i < a1.size(); ++i) {
        if (st.find(a1[i]) != st.find(a2[i])) return Branch{st.find(a1[i]), st.find(a2[i])};
      }
      return std::nullopt;
    };
    std::map<std::string, int> app_table;
    for (int t = 0; t < nterms_; ++t) {
      const GTerm& g = p_.terms[t];
      if (g.kind != GTerm::Kind::App) continue;
      std::string k = key_of(g.sym, g.args);
      auto [it, fresh_entry] = app_table.emplace(k, t);
      if (!fresh_entry && st.find(it->second) != st.find(t)) {
        auto br = conflict_pair(it->second, t, p_.terms[it->second].args, g.args);
        if (!br) return {TStatus::Unknown, {}, "inconsistent function table"};
        return split(lits, extras, depth, *br, true);
      }
    }
    std::map<std::string, bool> pred_table;
    std::map<std::string, int> pred_owner;
    for (int f : node_form_) {
      int cls = st.find(pred_node_[f]);
      if (cls != st.find(top_) && cls != st.find(bot_)) continue;
      bool truth = cls == st.find(top_);
      const GForm& g = p_.forms[f];
      std::string k = key_of(g.sym, g.args);
      auto [it, fresh_entry] = pred_table.emplace(k, truth);
      if (!fresh_entry && it->second != truth) {
        int other = pred_owner[k];
        auto br = conflict_pair(other, f, p_.forms[other].args, g.args);
        if (!br) return {TStatus::Unknown, {}, "inconsistent predicate table"};
        return split(lits, extras, depth, *br, true);
      }
      pred_owner.emplace(k, f);
    }
    // Independent evaluation of every assertion in the candidate model.
    std::map<std::string, cpp_int> consts;
    for (int t = 0; t < nterms_; ++t) {
      if (p_.terms[t].kind == GTerm::Kind::Const) consts[p_.terms[t].sym] = val(t);
    }
    std::set<cpp_int> distinct;
    std::size_t ndistinct = 0;
    for (int t = 0; t < nterms_; ++t) {
      const GTerm& g = p_.terms[t];
      if (g.kind == GTerm::Kind::Int) {
        ++ndistinct;
        distinct.insert(g.value);
      } else if (g.kind == GTerm::Kind::Const) {
        ++ndistinct;
        distinct.insert(consts[g.sym]);
      }
    }
    if (distinct.size() != ndistinct) return {TStatus::Unknown, {}, "constants not distinct in model"};
    std::map<std::string, cpp_int> fn_table;
    for (int t = 0; t < nterms_; ++t) {
      const GTerm& g = p_.terms[t];
      if (g.kind == GTerm::Kind::App) fn_table[key_of(g.sym, g.args)] = val(t);
    }
    std::vector<std::optional<cpp_int>> memo(nterms_);
    std::function<cpp_int(int)> eval_term = [&](int t) -> cpp_int {
      if (memo[t]) return *memo[t];
      const GTerm& g = p_.terms[t];
      cpp_int r;
      switch (g.kind) {
        case GTerm::Kind::Int: r = g.value; break;
        case GTerm::Kind::Const: r = consts[g.sym]; break;
        case GTerm::Kind::Var: r = val(t); break;
        case GTerm::Kind::Add: r = eval_term(g.args[0]) + eval_term(g.args[1]); break;
        case GTerm::Kind::Sub: r = eval_term(g.args[0]) - eval_term(g.args[1]); break;
        case GTerm::Kind::App: {
          std::string k = g.sym;
          for (int a : g.args) k += "," + eval_term(a).str();
          auto it = fn_table.find(k);
          r = it == fn_table.end() ? val(t) : it->second;
          break;
        }
      }
      memo[t] = r;
      return r;
    };
    std::function<bool(int)> eval_form = [&](int f) -> bool {
      const GForm& g = p_.forms[f];
      switch (g.kind) {
        case GForm::Kind::True: return true;
        case GForm::Kind::False: return false;
        case GForm::Kind::Eq: return eval_term(g.args[0]) == eval_term(g.args[1]);
        case GForm::Kind::Pred: {
          if (is_arith_pred(g.sym)) {
            cpp_int a = eval_term(g.args[0]);
            cpp_int b = eval_term(g.args[1]);
            if (g.sym == "<") return a < b;
            if (g.sym == "<=") return a <= b;
            if (g.sym == ">") return a > b;
            return a >= b;
          }
          std::string k = g.sym;
          for (int a : g.args) k += "," + eval_term(a).str();
          auto it = pred_table.find(k);
          return it != pred_table.end() && it->second;
        }
        case GForm::Kind::Not: return !eval_form(g.args[0]);
        case GForm::Kind::And:
          return std::all_of(g.args.begin(), g.args.end(), [&](int a) { return eval_form(a); });
        case GForm::Kind::Or:
          return std::any_of(g.args.begin(), g.args.end(), [&](int a) { return eval_form(a); });
      }
      return false;
    };
    for (int h : p_.hyps) {
      if (!eval_form(h)) return {TStatus::Unknown, {}, "model check failed"};
    }
    for (int l : p_.lemmas) {
      if (!eval_form(l)) return {TStatus::Unknown, {}, "model check failed"};
    }
    if (eval_form(p_.goal)) return {TStatus::Unknown, {}, "model check failed"};
    return {TStatus::Sat, render_model(eval_term, consts), {}};
  }

  std::string render_model(const std::function<cpp_int(int)>& eval_term,
                           const std::map<std::string, cpp_int>& consts) const {
    std::map<cpp_int, std::string> names;
    for (auto& [sym, v] : consts) {
      if (sym.rfind("str:", 0) == 0) names[v] = "\"" + sym.substr(4) + "\"";
      else names[v] = sym;
    }
    std::vector<std::string> lines;
    for (int t = 0; t < nterms_; ++t) {
      const GTerm& g = p_.terms[t];
      if (g.kind != GTerm::Kind::Var || g.sym.rfind("v:", 0) != 0) continue;
      cpp_int v = eval_term(t);
      auto it = names.find(v);
      lines.push_back(g.sym.substr(2) + " = " + (it == names.end() ? v.str() : it->second));
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (auto& l : lines) out += (out.empty() ? "" : "; ") + l;
    return out;
  }

  const Problem& p_;
  int nterms_ = 0;
  std::vector<int> pred_node_;
  std::vector<int> node_form_;
  int top_ = 0;
  int bot_ = 0;
  int nnodes_ = 0;
};

// ---------------------------------------------------------------------------
// Boolean search

class Search {
 public:
  explicit Search(const Problem& p) : p_(p), theory_(p) {
    true_var_ = new_var(-1);
    clauses_.push_back({2 * true_var_});
    for (int h : p.hyps) clauses_.push_back({encode(h, false)});
    for (int l : p.lemmas) clauses_.push_back({encode(l, false)});
    clauses_.push_back({encode(p.goal, true)});
  }

  OracleResult run() {
    assign_.assign(atom_form_.size(), -1);
    Outcome o = dfs();
    OracleResult r;
    if (o == Outcome::Found) {
      r.verdict = Verdict::Invalid;
      r.model = model_;
    } else if (incomplete_) {
      r.verdict = Verdict::Unknown;
      r.detail = reason_.empty() ? "search incomplete" : reason_;
    } else {
      r.verdict = Verdict::Valid;
    }
    return r;
  }

 private:
  enum class Outcome { Found, Closed, Aborted };

  int new_var(int form) {
    atom_form_.push_back(form);
    return static_cast<int>(atom_form_.size()) - 1;
  }

  static int negate(int lit) { return lit ^ 1; }

  // Returns a literal that implies the formula (or its negation).
  int encode(int f, bool negated) {
    auto key = std::make_pair(f, negated);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const GForm& g = p_.forms[f];
    int lit = 0;
    switch (g.kind) {
      case GForm::Kind::True: lit = 2 * true_var_ + (negated ? 1 : 0); break;
      case GForm::Kind::False: lit = 2 * true_var_ + (negated ? 0 : 1); break;
      case GForm::Kind::Eq:
      case GForm::Kind::Pred: {
        auto a = atom_var_.find(f);
        int v = a == atom_var_.end() ? atom_var_.emplace(f, new_var(f)).first->second : a->second;
        lit = 2 * v + (negated ? 1 : 0);
        break;
      }
      case GForm::Kind::Not: lit = encode(g.args[0], !negated); break;
      case GForm::Kind::And:
      case GForm::Kind::Or: {
        bool conjunctive = (g.kind == GForm::Kind::And) != negated;
        std::vector<int> kids;
        for (int a : g.args) kids.push_back(encode(a, negated));
        int v = new_var(-1);
        lit = 2 * v;
        if (conjunctive) {
          for (int k : kids) clauses_.push_back({negate(lit), k});
        } else {
          std::vector<int> c{negate(lit)};
          c.insert(c.end(), kids.begin(), kids.end());
          clauses_.push_back(std::move(c));
        }
        break;
      }
    }
    cache_.emplace(key, lit);
    return lit;
  }

  int lit_value(int lit) const {
    int v = assign_[lit >> 1];
    if (v < 0) return -1;
    return (lit & 1) ? 1 - v : v;
  }

  void set(int lit) {
    assign_[lit >> 1] = (lit & 1) ? 0 : 1;
    trail_.push_back(lit >> 1);
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      assign_[trail_.back()] = -1;
      trail_.pop_back();
    }
  }

  bool propagate() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& c : clauses_) {
        int unassigned = -1;
        int count = 0;
        bool sat = false;
        for (int l : c) {
          int v = lit_value(l);
          if (v == 1) {
            sat = true;
            break;
          }
          if (v < 0) {
            ++count;
            unassigned = l;
          }
        }
        if (sat) continue;
        if (count == 0) return false;
        if (count == 1) {
          set(unassigned);
          changed = true;
        }
      }
    }
    return true;
  }

  Literals literals() const {
    Literals out;
    for (std::size_t v = 0; v < assign_.size(); ++v) {
      if (atom_form_[v] >= 0 && assign_[v] >= 0) out.push_back({atom_form_[v], assign_[v] == 1});
    }
    return out;
  }

  // Shrinks a theory-inconsistent literal set to a minimal core and records
  // its negation as a clause.
  void learn(Literals lits) {
    for (std::size_t i = 0; i < lits.size();) {
      Literals without = lits;
      without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
      if (theory_.check(without, {}, false, 0).status == TStatus::Unsat) {
        lits = std::move(without);
      } else {
        ++i;
      }
    }
    std::vector<int> clause;
    for (auto& [form, value] : lits) clause.push_back(2 * atom_var_.at(form) + (value ? 1 : 0));
    clauses_.push_back(std::move(clause));
  }

  Outcome dfs() {
    if (++nodes_ > InternalOracle::kMaxNodes) {
      incomplete_ = true;
      reason_ = "node budget exhausted";
      return Outcome::Aborted;
    }
    std::size_t mark = trail_.size();
    if (!propagate()) {
      undo(mark);
      return Outcome::Closed;
    }
    Literals lits = literals();
    TheoryResult partial = theory_.check(lits, {}, false, 0);
    if (partial.status == TStatus::Unsat) {
      learn(lits);
      undo(mark);
      return Outcome::Closed;
    }
    const std::vector<int>* open = nullptr;
    std::size_t best = 0;
    for (auto& c : clauses_) {
      std::size_t unassigned = 0;
      bool sat = false;
      for (int l : c) {
        int v = lit_value(l);
        if (v == 1) {
          sat = true;
          break;
        }
        unassigned += v < 0;
      }
      if (!sat && (!open || unassigned < best)) {
        open = &c;
        best = unassigned;
        if (best <= 2) break;
      }
    }
    if (!open) {
      TheoryResult full = theory_.check(lits, {}, true, 0);
      if (full.status == TStatus::Sat) {
        model_ = full.model;
        return Outcome::Found;
      }
      if (full.status == TStatus::Unknown) {
        incomplete_ = true;
        reason_ = full.reason;
      }
      undo(mark);
      return Outcome::Closed;
    }
    int choice = -1;
    for (int l : *open) {
      if (lit_value(l) < 0) {
        choice = l;
        break;
      }
    }
    for (int attempt : {choice, negate(choice)}) {
      std::size_t inner = trail_.size();
      set(attempt);
      Outcome o = dfs();
      if (o == Outcome::Found) return o;
      undo(inner);
      if (o == Outcome::Aborted) {
        undo(mark);
        return o;
      }
    }
    undo(mark);
    return Outcome::Closed;
  }

  const Problem& p_;
  Theory theory_;
  int true_var_ = 0;
  std::vector<int> atom_form_;
  std::map<int, int> atom_var_;
  std::map<std::pair<int, bool>, int> cache_;
  std::vector<std::vector<int>> clauses_;
  std::vector<int> assign_;
  std::vector<int> trail_;
  int nodes_ = 0;
  bool incomplete_ = false;
  std::string reason_;
  std::string model_;
};

}  // namespace

OracleResult InternalOracle::check(const Obligation& ob) { return check(encode(ob)); }

OracleResult InternalOracle::check(const Problem& p) {
  Search s(p);
  return s.run();
}

}  // namespace dimp
