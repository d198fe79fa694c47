#include <algorithm>
#include <set>
#include <sstream>

#include "dimp/error.hpp"
#include "dimp/printer.hpp"
#include "dimp/solver.hpp"
#include "dimp/subst.hpp"

namespace dimp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr int kLemmaRounds = 2;

std::string term_key(const GTerm& t) {
  std::string k = std::to_string(static_cast<int>(t.kind)) + "|" + std::to_string(t.value) + "|" + t.sym;
  for (int a : t.args) k += "," + std::to_string(a);
  return k;
}

std::string form_key(const GForm& f) {
  std::string k = std::to_string(static_cast<int>(f.kind)) + "|" + f.sym;
  for (int a : f.args) k += "," + std::to_string(a);
  return k;
}

class Encoder {
 public:
  explicit Encoder(Problem& p) : p_(p) {}

  int term(const Walk& w) {
    return std::visit(
        overloaded{
            [&](const WVar& n) { return var("v:" + n.name.str()); },
            [&](const WConst& n) { return constant(n.value); },
            [&](const WLoc& n) { return konst("loc:" + n.loc.str()); },
            [&](const WExtend& n) { return app("upd", {term(n.dict), term(n.key), term(n.val)}); },
            [&](const WTuple& n) {
              std::vector<int> args;
              for (auto& i : n.items) args.push_back(term(i));
              return app("tuple", std::move(args));
            },
            [&](const WFun&) {
              // Lambdas are opaque and compared by syntactic identity.
              std::string text = to_string(w);
              auto it = lambdas_.find(text);
              if (it == lambdas_.end()) {
                it = lambdas_.emplace(text, "lam" + std::to_string(lambdas_.size())).first;
                p_.legend.emplace_back(it->second, text);
              }
              return var("fn:" + it->second);
            },
            [&](const WApp& n) {
              std::vector<int> args;
              for (auto& i : n.args) args.push_back(term(i));
              if ((n.fn == "+" || n.fn == "-") && args.size() == 2) {
                GTerm t;
                t.kind = n.fn == "+" ? GTerm::Kind::Add : GTerm::Kind::Sub;
                t.args = std::move(args);
                return p_.term(std::move(t));
              }
              if (n.fn == "-" && args.size() == 1) {
                GTerm t;
                t.kind = GTerm::Kind::Sub;
                t.args = {integer(0), args[0]};
                return p_.term(std::move(t));
              }
              return app(n.fn, std::move(args));
            },
        },
        w->node);
  }

  int form(const Form& f) {
    return std::visit(
        overloaded{
            [&](const FTrue&) { return p_.form({GForm::Kind::True, {}, {}}); },
            [&](const FFalse&) { return p_.form({GForm::Kind::False, {}, {}}); },
            [&](const FEq& n) { return eq(term(n.lhs), term(n.rhs)); },
            [&](const FPred& n) {
              std::vector<int> args;
              for (auto& a : n.args) args.push_back(term(a));
              if (is_arith_pred(n.name) && args.size() == 2) return pred(n.name, std::move(args));
              std::string sym = "p:" + n.name + "/" + std::to_string(args.size());
              return pred(std::move(sym), std::move(args));
            },
            [&](const FHasTyp& n) {
              std::string key = canonical(n.type);
              auto it = types_.find(key);
              if (it == types_.end()) {
                it = types_.emplace(key, "ty" + std::to_string(types_.size())).first;
                p_.legend.emplace_back(it->second, key);
              }
              return pred(it->second, {term(n.term)});
            },
            [&](const FHeapHas& n) {
              return pred("hh:" + n.heap.str() + ":" + n.loc.str(), {term(n.term)});
            },
            [&](const FAnd& n) {
              std::vector<int> kids;
              for (auto& i : n.items) kids.push_back(form(i));
              return conj(std::move(kids));
            },
            [&](const FOr& n) {
              std::vector<int> kids;
              for (auto& i : n.items) kids.push_back(form(i));
              return disj(std::move(kids));
            },
            [&](const FNot& n) { return neg(form(n.body)); },
            [&](const FImplies& n) { return implies(form(n.lhs), form(n.rhs)); },
            [&](const FIte& n) {
              int c = form(n.cond);
              return conj({implies(c, form(n.then_f)), implies(neg(c), form(n.else_f))});
            },
        },
        f->node);
  }

  int var(std::string sym) {
    GTerm t;
    t.kind = GTerm::Kind::Var;
    t.sym = std::move(sym);
    return p_.term(std::move(t));
  }
  int konst(std::string sym) {
    GTerm t;
    t.kind = GTerm::Kind::Const;
    t.sym = std::move(sym);
    return p_.term(std::move(t));
  }
  int integer(std::int64_t v) {
    GTerm t;
    t.kind = GTerm::Kind::Int;
    t.value = v;
    return p_.term(std::move(t));
  }
  int constant(const Constant& c) {
    switch (c.kind) {
      case Constant::Kind::Int: return integer(c.i);
      case Constant::Kind::Str: return konst("str:" + c.s);
      case Constant::Kind::Bool: return konst(c.b ? "true" : "false");
      case Constant::Kind::Null: return konst("null");
      case Constant::Kind::Undefined: return konst("undefined");
      case Constant::Kind::EmptyDict: return konst("emptydict");
    }
    return konst("?");
  }
  int app(const std::string& fn, std::vector<int> args) {
    GTerm t;
    t.kind = GTerm::Kind::App;
    t.sym = fn + "/" + std::to_string(args.size());
    t.args = std::move(args);
    return p_.term(std::move(t));
  }

  int eq(int a, int b) {
    if (a > b) std::swap(a, b);
    return p_.form({GForm::Kind::Eq, {}, {a, b}});
  }
  int pred(std::string sym, std::vector<int> args) {
    return p_.form({GForm::Kind::Pred, std::move(sym), std::move(args)});
  }
  int neg(int f) { return p_.form({GForm::Kind::Not, {}, {f}}); }
  int conj(std::vector<int> kids) {
    if (kids.size() == 1) return kids[0];
    return p_.form({GForm::Kind::And, {}, std::move(kids)});
  }
  int disj(std::vector<int> kids) {
    if (kids.size() == 1) return kids[0];
    return p_.form({GForm::Kind::Or, {}, std::move(kids)});
  }
  int implies(int a, int b) { return disj({neg(a), b}); }
  int iff(int a, int b) { return conj({implies(a, b), implies(b, a)}); }

 private:
  Problem& p_;
  std::map<std::string, std::string> lambdas_;
  std::map<std::string, std::string> types_;
};

// Index of a tuple position named by an integer literal or a decimal string.
std::optional<std::size_t> position(const GTerm& k) {
  if (k.kind == GTerm::Kind::Int && k.value >= 0) return static_cast<std::size_t>(k.value);
  if (k.kind == GTerm::Kind::Const && k.sym.rfind("str:", 0) == 0) {
    std::string digits = k.sym.substr(4);
    if (!digits.empty() && digits.size() < 9 &&
        std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return static_cast<std::size_t>(std::stoul(digits));
    }
  }
  return std::nullopt;
}

void add_lemmas(Problem& p, Encoder& enc) {
  std::set<int> done_tf, done_bool;
  std::set<std::pair<int, int>> done_tuple, done_upd, done_has;
  for (int round = 0; round < kLemmaRounds; ++round) {
    std::size_t nforms = p.forms.size();
    std::size_t nterms = p.terms.size();
    std::vector<int> truthy_terms, bool_terms, sel_terms, tuple_terms, upd_terms;
    std::vector<int> has_atoms;
    for (std::size_t i = 0; i < nforms; ++i) {
      const GForm& f = p.forms[i];
      if (f.kind != GForm::Kind::Pred) continue;
      if ((f.sym == "p:truthy/1" || f.sym == "p:falsy/1") && !done_tf.count(f.args[0])) {
        truthy_terms.push_back(f.args[0]);
        done_tf.insert(f.args[0]);
      }
      if (f.sym == "p:Bool/1" && !done_bool.count(f.args[0])) {
        bool_terms.push_back(f.args[0]);
        done_bool.insert(f.args[0]);
      }
      if (f.sym == "p:has/2") has_atoms.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < nterms; ++i) {
      const GTerm& t = p.terms[i];
      if (t.kind != GTerm::Kind::App) continue;
      if (t.sym == "sel/2") sel_terms.push_back(static_cast<int>(i));
      if (t.sym.rfind("tuple/", 0) == 0) tuple_terms.push_back(static_cast<int>(i));
      if (t.sym == "upd/3") upd_terms.push_back(static_cast<int>(i));
    }
    for (int t : truthy_terms) {
      int tr = enc.pred("p:truthy/1", {t});
      int fa = enc.pred("p:falsy/1", {t});
      p.lemmas.push_back(enc.disj({enc.neg(tr), enc.neg(fa)}));
      p.lemmas.push_back(enc.disj({tr, fa}));
      p.lemmas.push_back(enc.implies(enc.eq(t, enc.konst("true")), tr));
      for (int c : {enc.konst("false"), enc.konst("null"), enc.konst("undefined"), enc.integer(0),
                    enc.konst("str:")}) {
        p.lemmas.push_back(enc.implies(enc.eq(t, c), fa));
      }
    }
    for (int t : bool_terms) {
      p.lemmas.push_back(enc.implies(enc.pred("p:Bool/1", {t}),
                                     enc.disj({enc.eq(t, enc.konst("true")), enc.eq(t, enc.konst("false"))})));
    }
    for (int s : sel_terms) {
      int d = p.terms[s].args[0];
      int k = p.terms[s].args[1];
      auto pos = position(p.terms[k]);
      if (pos) {
        for (int tp : tuple_terms) {
          if (!done_tuple.insert({s, tp}).second) continue;
          if (*pos >= p.terms[tp].args.size()) continue;
          int item = p.terms[tp].args[*pos];
          p.lemmas.push_back(enc.implies(enc.eq(d, tp), enc.eq(s, item)));
        }
      }
      for (int u : upd_terms) {
        if (!done_upd.insert({s, u}).second) continue;
        int base = p.terms[u].args[0];
        int key = p.terms[u].args[1];
        int val = p.terms[u].args[2];
        int same = enc.eq(k, key);
        int older = enc.app("sel", {base, k});
        p.lemmas.push_back(enc.implies(enc.eq(d, u), enc.conj({enc.implies(same, enc.eq(s, val)),
                                                                enc.implies(enc.neg(same), enc.eq(s, older))})));
      }
    }
    for (int h : has_atoms) {
      int d = p.forms[h].args[0];
      int k = p.forms[h].args[1];
      int empty = enc.konst("emptydict");
      if (done_has.insert({h, -1}).second) {
        p.lemmas.push_back(enc.implies(enc.eq(d, empty), enc.neg(h)));
      }
      for (int u : upd_terms) {
        if (!done_has.insert({h, u}).second) continue;
        int base = p.terms[u].args[0];
        int key = p.terms[u].args[1];
        int older = enc.pred("p:has/2", {base, k});
        p.lemmas.push_back(enc.implies(enc.eq(d, u), enc.iff(h, enc.disj({enc.eq(k, key), older}))));
      }
    }
    if (p.forms.size() == nforms && p.terms.size() == nterms) break;
  }
  std::set<std::string> tags;
  for (auto& f : p.forms) {
    if (f.kind == GForm::Kind::Pred) tags.insert(f.sym);
  }
  std::size_t nterms = p.terms.size();
  for (std::size_t i = 0; i < nterms; ++i) {
    const GTerm t = p.terms[i];
    std::string tag;
    if (t.kind == GTerm::Kind::Int || t.kind == GTerm::Kind::Add || t.kind == GTerm::Kind::Sub) {
      tag = "p:Int/1";
    } else if (t.kind == GTerm::Kind::Const && t.sym.rfind("str:", 0) == 0) {
      tag = "p:Str/1";
    } else if (t.kind == GTerm::Kind::Const && (t.sym == "true" || t.sym == "false")) {
      tag = "p:Bool/1";
    } else if ((t.kind == GTerm::Kind::Const && t.sym == "emptydict") ||
               (t.kind == GTerm::Kind::App && t.sym == "upd/3")) {
      tag = "p:Dict/1";
    }
    if (!tag.empty() && tags.count(tag)) p.lemmas.push_back(enc.pred(tag, {static_cast<int>(i)}));
  }
}

std::string quote_symbol(const std::string& s) {
  std::string out = "|";
  for (char c : s) {
    if (c == '|' || c == '\\' || static_cast<unsigned char>(c) < 32 || static_cast<unsigned char>(c) > 126) {
      static const char* hex = "0123456789abcdef";
      out += "\\x";
      out += hex[(static_cast<unsigned char>(c) >> 4) & 15];
      out += hex[static_cast<unsigned char>(c) & 15];
    } else {
      out += c;
    }
  }
  return out + "|";
}

std::string fn_symbol(const std::string& sym) {
  // Strip the "/arity" suffix used for interning.
  return "f:" + sym;
}

class Emitter {
 public:
  explicit Emitter(const Problem& p) : p_(p) {}

  std::string term(int id) const {
    const GTerm& t = p_.terms[id];
    switch (t.kind) {
      case GTerm::Kind::Int:
        return t.value < 0 ? "(- " + std::to_string(-t.value) + ")" : std::to_string(t.value);
      case GTerm::Kind::Const: return quote_symbol("c:" + t.sym);
      case GTerm::Kind::Var: return quote_symbol(t.sym);
      case GTerm::Kind::Add: return "(+ " + term(t.args[0]) + " " + term(t.args[1]) + ")";
      case GTerm::Kind::Sub: return "(- " + term(t.args[0]) + " " + term(t.args[1]) + ")";
      case GTerm::Kind::App: {
        std::string out = "(" + quote_symbol(fn_symbol(t.sym));
        for (int a : t.args) out += " " + term(a);
        return out + ")";
      }
    }
    return "0";
  }

  std::string form(int id) const {
    const GForm& f = p_.forms[id];
    switch (f.kind) {
      case GForm::Kind::True: return "true";
      case GForm::Kind::False: return "false";
      case GForm::Kind::Eq: return "(= " + term(f.args[0]) + " " + term(f.args[1]) + ")";
      case GForm::Kind::Pred: {
        std::string head = is_arith_pred(f.sym) ? f.sym : quote_symbol(f.sym);
        std::string out = "(" + head;
        for (int a : f.args) out += " " + term(a);
        return out + ")";
      }
      case GForm::Kind::Not: return "(not " + form(f.args[0]) + ")";
      case GForm::Kind::And:
      case GForm::Kind::Or: {
        if (f.args.empty()) return f.kind == GForm::Kind::And ? "true" : "false";
        std::string out = f.kind == GForm::Kind::And ? "(and" : "(or";
        for (int a : f.args) out += " " + form(a);
        return out + ")";
      }
    }
    return "true";
  }

 private:
  const Problem& p_;
};

}  // namespace

bool is_arith_pred(const std::string& sym) {
  return sym == "<" || sym == "<=" || sym == ">" || sym == ">=";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::Invalid: return "invalid";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

int Problem::term(GTerm t) {
  std::string k = term_key(t);
  auto it = term_index_.find(k);
  if (it != term_index_.end()) return it->second;
  int id = static_cast<int>(terms.size());
  terms.push_back(std::move(t));
  term_index_.emplace(std::move(k), id);
  return id;
}

int Problem::form(GForm f) {
  std::string k = form_key(f);
  auto it = form_index_.find(k);
  if (it != form_index_.end()) return it->second;
  int id = static_cast<int>(forms.size());
  forms.push_back(std::move(f));
  form_index_.emplace(std::move(k), id);
  return id;
}

Problem encode(const Obligation& ob) {
  Problem p;
  Encoder enc(p);
  for (auto& h : ob.hyps) p.hyps.push_back(enc.form(h));
  p.goal = enc.form(ob.goal);
  add_lemmas(p, enc);
  return p;
}

std::string emit_smtlib(const Obligation& ob) { return emit_smtlib(encode(ob)); }

std::string emit_smtlib(const Problem& p) {
  std::ostringstream out;
  out << "(set-logic QF_UFLIA)\n";
  for (auto& [sym, text] : p.legend) {
    std::string flat = text;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    out << "; " << sym << " = " << flat << "\n";
  }
  std::set<std::string> declared;
  std::vector<std::string> distinct;
  for (const GTerm& t : p.terms) {
    if (t.kind == GTerm::Kind::Int) {
      distinct.push_back(Emitter(p).term(&t - p.terms.data()));
      continue;
    }
    std::string sym;
    std::string sig;
    if (t.kind == GTerm::Kind::Const) {
      sym = quote_symbol("c:" + t.sym);
      sig = "() Int";
      distinct.push_back(sym);
    } else if (t.kind == GTerm::Kind::Var) {
      sym = quote_symbol(t.sym);
      sig = "() Int";
    } else if (t.kind == GTerm::Kind::App) {
      sym = quote_symbol(fn_symbol(t.sym));
      sig = "(";
      for (std::size_t i = 0; i < t.args.size(); ++i) sig += i ? " Int" : "Int";
      sig += ") Int";
    } else {
      continue;
    }
    if (declared.insert(sym).second) out << "(declare-fun " << sym << " " << sig << ")\n";
  }
  for (const GForm& f : p.forms) {
    if (f.kind != GForm::Kind::Pred || is_arith_pred(f.sym)) continue;
    std::string sym = quote_symbol(f.sym);
    if (!declared.insert(sym).second) continue;
    std::string sig = "(";
    for (std::size_t i = 0; i < f.args.size(); ++i) sig += i ? " Int" : "Int";
    out << "(declare-fun " << sym << " " << sig << ") Bool)\n";
  }
  if (distinct.size() >= 2) {
    out << "(assert (distinct";
    for (auto& d : distinct) out << " " << d;
    out << "))\n";
  }
  Emitter em(p);
  for (int h : p.hyps) out << "(assert " << em.form(h) << ")\n";
  for (int l : p.lemmas) out << "(assert " << em.form(l) << ")\n";
  out << "(assert (not " << em.form(p.goal) << "))\n";
  out << "(check-sat)\n(exit)\n";
  return out.str();
}

}  // namespace dimp
