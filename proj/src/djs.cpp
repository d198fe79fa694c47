#include "dimp/djs.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <set>

#include "dimp/error.hpp"
#include "dimp/sexpr.hpp"

namespace dimp {

namespace {

// ---------------------------------------------------------------------------
// Lexer

struct Token {
  enum class Kind { Ident, Num, Str, Punct, Annot, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 0;
};

[[noreturn]] void syntax_error(int line, const std::string& msg) { fail(ErrorKind::Parse, msg, line); }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return k < src.size() ? src[k] : '\0'; };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && at(i + 1) == '/') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && at(i + 1) == '*') {
      std::size_t end = src.find("*/", i + 2);
      if (end == std::string_view::npos) syntax_error(line, "unterminated comment");
      std::string_view body = src.substr(i + 2, end - i - 2);
      int start = line;
      for (char ch : body) line += ch == '\n';
      if (!body.empty() && body[0] == ':') {
        std::string text(body.substr(1));
        out.push_back({Token::Kind::Annot, text, start});
      }
      i = end + 2;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Token::Kind::Num, std::string(src.substr(i, j - i)), line});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '$')) {
        ++j;
      }
      out.push_back({Token::Kind::Ident, std::string(src.substr(i, j - i)), line});
      i = j;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::string s;
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != c) {
        if (src[j] == '\n') syntax_error(line, "unterminated string");
        if (src[j] == '\\' && j + 1 < src.size()) {
          ++j;
          char e = src[j];
          s += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        } else {
          s += src[j];
        }
        ++j;
      }
      if (j >= src.size()) syntax_error(line, "unterminated string");
      out.push_back({Token::Kind::Str, s, line});
      i = j + 1;
      continue;
    }
    static const char* kPuncts[] = {"===", "!==", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=",
                                    "(",   ")",   "{",  "}",  "[",  "]",  ";",  ",",  ".",  ":",  "=",  "<",
                                    ">",   "+",   "-",  "*",  "/",  "%",  "!",  "?"};
    bool matched = false;
    for (const char* p : kPuncts) {
      std::string_view pv(p);
      if (src.substr(i, pv.size()) == pv) {
        out.push_back({Token::Kind::Punct, std::string(pv), line});
        i += pv.size();
        matched = true;
        break;
      }
    }
    if (!matched) syntax_error(line, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Token::Kind::End, "", line});
  return out;
}

// ---------------------------------------------------------------------------
// Surface syntax

struct JExpr;
struct JStmt;
using JE = std::shared_ptr<JExpr>;
using JS = std::shared_ptr<JStmt>;

struct JFunc {
  std::string name;  // empty for anonymous functions
  std::vector<std::string> params;
  bool ctor = false;
  std::string annot;  // D_imp type text
  std::vector<JS> body;
  int line = 0;
};

struct JExpr {
  enum class Kind { Num, Str, Bool, Null, Undef, Ident, Member, Index, Call, Assign, Binary, Unary, Func, Object, Thaw, Freeze };
  Kind kind = Kind::Undef;
  std::string text;  // literal, identifier, member name, operator, location
  std::string state;
  std::vector<JE> kids;
  std::vector<std::pair<std::string, JE>> fields;
  std::shared_ptr<JFunc> fn;
  int line = 0;
};

struct JStmt {
  enum class Kind { Var, Expr, Return, If, While, Break, Assert, Block, Func, Decl };
  Kind kind = Kind::Expr;
  std::string name;
  std::string annot;
  JE expr;
  std::vector<JS> body, alt;
  bool has_alt = false;
  std::shared_ptr<JFunc> fn;
  int line = 0;
};

class JParser {
 public:
  explicit JParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<JS> program() {
    std::vector<JS> out;
    while (peek().kind != Token::Kind::End) {
      if (peek().kind == Token::Kind::Annot && is_decl_annot(peek().text)) {
        auto s = std::make_shared<JStmt>();
        s->kind = JStmt::Kind::Decl;
        s->annot = peek().text;
        s->line = peek().line;
        ++pos_;
        out.push_back(s);
        continue;
      }
      out.push_back(statement());
    }
    return out;
  }

 private:
  static bool is_decl_annot(const std::string& t) {
    std::size_t k = t.find_first_not_of(" \t\r\n");
    return k != std::string::npos && t[k] == '(';
  }

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool is_punct(const char* p, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Punct && peek(k).text == p;
  }
  bool is_word(const char* w) const { return peek().kind == Token::Kind::Ident && peek().text == w; }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  void expect(const char* p) {
    if (!is_punct(p)) syntax_error(peek().line, std::string("expected '") + p + "' but found '" + peek().text + "'");
    ++pos_;
  }
  std::string ident() {
    if (peek().kind != Token::Kind::Ident) syntax_error(peek().line, "expected an identifier");
    return next().text;
  }
  [[noreturn]] void unsupported(const std::string& what) {
    syntax_error(peek().line, "'" + what + "' is not in the DJS subset");
  }

  std::vector<JS> block() {
    expect("{");
    std::vector<JS> out;
    while (!is_punct("}")) {
      if (peek().kind == Token::Kind::End) syntax_error(peek().line, "unterminated block");
      out.push_back(statement());
    }
    expect("}");
    return out;
  }

  std::shared_ptr<JFunc> function(bool want_name) {
    auto f = std::make_shared<JFunc>();
    f->line = peek().line;
    ++pos_;  // function
    if (peek().kind == Token::Kind::Ident) {
      f->name = ident();
    } else if (want_name) {
      syntax_error(peek().line, "function declaration needs a name");
    }
    expect("(");
    while (!is_punct(")")) {
      f->params.push_back(ident());
      if (!is_punct(")")) expect(",");
    }
    expect(")");
    if (peek().kind != Token::Kind::Annot) {
      syntax_error(peek().line, "function " + (f->name.empty() ? std::string("expression") : f->name) +
                                    " needs a type annotation /*: T */");
    }
    std::string a = next().text;
    std::size_t k = a.find_first_not_of(" \t\r\n");
    if (k != std::string::npos && a.compare(k, 5, "#ctor") == 0) {
      f->ctor = true;
      a = a.substr(k + 5);
    }
    f->annot = a;
    f->body = block();
    return f;
  }

  JS statement() {
    auto s = std::make_shared<JStmt>();
    s->line = peek().line;
    if (peek().kind == Token::Kind::Annot) {
      if (peek(1).kind == Token::Kind::Ident && peek(1).text == "while") {
        s->annot = next().text;
        ++pos_;
        s->kind = JStmt::Kind::While;
        expect("(");
        s->expr = expression();
        expect(")");
        s->body = block();
        return s;
      }
    }
    if (is_word("while")) syntax_error(peek().line, "while loop needs a type annotation /*: T */");
    for (const char* w : {"for", "do", "continue", "with", "switch", "try", "throw", "new", "delete"}) {
      if (is_word(w)) unsupported(w);
    }
    if (is_word("function")) {
      s->kind = JStmt::Kind::Func;
      s->fn = function(true);
      return s;
    }
    if (is_word("var")) {
      ++pos_;
      s->kind = JStmt::Kind::Var;
      s->name = ident();
      if (is_punct("=")) {
        ++pos_;
        s->expr = expression();
      }
      expect(";");
      return s;
    }
    if (is_word("return")) {
      ++pos_;
      s->kind = JStmt::Kind::Return;
      if (!is_punct(";")) s->expr = expression();
      expect(";");
      return s;
    }
    if (is_word("if")) {
      ++pos_;
      s->kind = JStmt::Kind::If;
      expect("(");
      s->expr = expression();
      expect(")");
      s->body = branch();
      if (is_word("else")) {
        ++pos_;
        s->has_alt = true;
        s->alt = branch();
      }
      return s;
    }
    if (is_word("break")) {
      ++pos_;
      s->kind = JStmt::Kind::Break;
      if (peek().kind == Token::Kind::Ident) unsupported("labelled break");
      expect(";");
      return s;
    }
    if (is_word("assert") && is_punct("(", 1)) {
      pos_ += 2;
      s->kind = JStmt::Kind::Assert;
      s->expr = expression();
      expect(")");
      expect(";");
      return s;
    }
    if (is_punct("{")) {
      s->kind = JStmt::Kind::Block;
      s->body = block();
      return s;
    }
    s->kind = JStmt::Kind::Expr;
    s->expr = expression();
    expect(";");
    return s;
  }

  std::vector<JS> branch() {
    if (is_punct("{")) return block();
    return {statement()};
  }

  JE make(JExpr::Kind k, int line) {
    auto e = std::make_shared<JExpr>();
    e->kind = k;
    e->line = line;
    return e;
  }

  JE expression() { return assignment(); }

  JE assignment() {
    JE lhs = logical_or();
    if (is_punct("=")) {
      int line = next().line;
      if (lhs->kind != JExpr::Kind::Ident && lhs->kind != JExpr::Kind::Member && lhs->kind != JExpr::Kind::Index) {
        syntax_error(line, "invalid assignment target");
      }
      JE e = make(JExpr::Kind::Assign, line);
      e->kids = {lhs, assignment()};
      return e;
    }
    for (const char* op : {"+=", "-=", "++", "--", "?"}) {
      if (is_punct(op)) unsupported(op);
    }
    return lhs;
  }

  JE binary_level(const std::vector<const char*>& ops, const std::function<JE()>& sub) {
    JE lhs = sub();
    while (true) {
      const char* hit = nullptr;
      for (const char* op : ops) {
        if (is_punct(op)) hit = op;
      }
      if (!hit) return lhs;
      int line = next().line;
      JE e = make(JExpr::Kind::Binary, line);
      e->text = hit;
      e->kids = {lhs, sub()};
      lhs = e;
    }
  }

  JE logical_or() { return binary_level({"||"}, [&] { return logical_and(); }); }
  JE logical_and() { return binary_level({"&&"}, [&] { return equality(); }); }
  JE equality() {
    if (is_punct("==", 0) || is_punct("!=", 0)) unsupported(peek().text);
    JE e = binary_level({"===", "!=="}, [&] { return relational(); });
    if (is_punct("==") || is_punct("!=")) unsupported(peek().text);
    return e;
  }
  JE relational() { return binary_level({"<", "<=", ">", ">="}, [&] { return additive(); }); }
  JE additive() {
    JE e = binary_level({"+", "-"}, [&] { return unary(); });
    for (const char* op : {"*", "/", "%"}) {
      if (is_punct(op)) unsupported(op);
    }
    return e;
  }

  JE unary() {
    if (is_punct("!") || is_punct("-")) {
      Token t = next();
      JE e = make(JExpr::Kind::Unary, t.line);
      e->text = t.text;
      e->kids = {unary()};
      return e;
    }
    if (peek().kind == Token::Kind::Annot) {
      Token t = next();
      auto items = read_sexprs("(" + t.text + ")");
      if (items.size() != 1 || items[0].items.empty() || !items[0].items[0].is_atom()) {
        syntax_error(t.line, "malformed directive");
      }
      const auto& d = items[0].items;
      JE e;
      if (d[0].text == "#thaw" && d.size() == 2) {
        e = make(JExpr::Kind::Thaw, t.line);
        e->text = write_flat(d[1]);
      } else if (d[0].text == "#freeze" && d.size() == 3) {
        e = make(JExpr::Kind::Freeze, t.line);
        e->text = write_flat(d[1]);
        e->state = write_flat(d[2]);
      } else {
        syntax_error(t.line, "expected a #thaw or #freeze directive");
      }
      e->kids = {unary()};
      return e;
    }
    return postfix();
  }

  JE postfix() {
    JE e = primary();
    while (true) {
      if (is_punct(".")) {
        int line = next().line;
        JE m = make(JExpr::Kind::Member, line);
        m->text = ident();
        m->kids = {e};
        e = m;
      } else if (is_punct("[")) {
        int line = next().line;
        JE m = make(JExpr::Kind::Index, line);
        m->kids = {e, expression()};
        expect("]");
        e = m;
      } else if (is_punct("(")) {
        int line = next().line;
        JE c = make(JExpr::Kind::Call, line);
        c->kids = {e};
        while (!is_punct(")")) {
          c->kids.push_back(expression());
          if (!is_punct(")")) expect(",");
        }
        expect(")");
        e = c;
      } else {
        return e;
      }
    }
  }

  JE primary() {
    const Token& t = peek();
    int line = t.line;
    if (t.kind == Token::Kind::Num) {
      JE e = make(JExpr::Kind::Num, line);
      e->text = next().text;
      return e;
    }
    if (t.kind == Token::Kind::Str) {
      JE e = make(JExpr::Kind::Str, line);
      e->text = next().text;
      return e;
    }
    if (t.kind == Token::Kind::Punct && t.text == "(") {
      ++pos_;
      JE e = expression();
      expect(")");
      return e;
    }
    if (t.kind == Token::Kind::Punct && t.text == "{") {
      ++pos_;
      JE e = make(JExpr::Kind::Object, line);
      while (!is_punct("}")) {
        std::string key;
        if (peek().kind == Token::Kind::Str || peek().kind == Token::Kind::Ident) {
          key = next().text;
        } else {
          syntax_error(peek().line, "expected a property name");
        }
        expect(":");
        e->fields.emplace_back(key, expression());
        if (!is_punct("}")) expect(",");
      }
      expect("}");
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "function") {
        JE e = make(JExpr::Kind::Func, line);
        e->fn = function(false);
        return e;
      }
      for (const char* w : {"new", "delete", "typeof", "instanceof", "in", "void"}) {
        if (t.text == w) unsupported(w);
      }
      std::string w = next().text;
      if (w == "true" || w == "false") {
        JE e = make(JExpr::Kind::Bool, line);
        e->text = w;
        return e;
      }
      if (w == "null") return make(JExpr::Kind::Null, line);
      if (w == "undefined") return make(JExpr::Kind::Undef, line);
      JE e = make(JExpr::Kind::Ident, line);
      e->text = w;
      return e;
    }
    syntax_error(line, "unexpected '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Desugaring

enum class VarKind { Cell, Plain };
using Scope = std::map<std::string, VarKind>;
using Cont = std::function<Exp(Val)>;

Val str(const std::string& s) { return mk::vconst(Constant::string(s)); }
Val undef() { return mk::vconst(Constant::undefined()); }

bool mentions(const std::vector<JS>& body, const std::string& name);

bool mentions(const JE& e, const std::string& name) {
  if (!e) return false;
  if (e->kind == JExpr::Kind::Ident && e->text == name) return true;
  for (auto& k : e->kids) {
    if (mentions(k, name)) return true;
  }
  for (auto& [_, f] : e->fields) {
    if (mentions(f, name)) return true;
  }
  if (e->fn) {
    if (std::find(e->fn->params.begin(), e->fn->params.end(), name) != e->fn->params.end()) return false;
    return mentions(e->fn->body, name);
  }
  return false;
}

bool mentions(const std::vector<JS>& body, const std::string& name) {
  for (auto& s : body) {
    if (mentions(s->expr, name) || mentions(s->body, name) || mentions(s->alt, name)) return true;
    if (s->fn && mentions(s->fn->body, name)) return true;
  }
  return false;
}

class Desugarer {
 public:
  explicit Desugarer(ParseOptions opts) : opts_(opts) {}

  Program program(const std::vector<JS>& stmts) {
    Program out;
    std::vector<JS> main_body;
    int main_line = 0;
    for (auto& s : stmts) {
      temps_ = 0;
      used_locs_ = global_locs_;
      if (s->kind == JStmt::Kind::Decl) {
        Program p = parse_program(s->annot, opts_);
        for (auto& d : p.decls) {
          d.line = s->line;
          out.decls.push_back(d);
        }
        continue;
      }
      if (s->kind == JStmt::Kind::Func) {
        globals_.insert(s->fn->name);
        out.decls.push_back(define(*s->fn));
        continue;
      }
      if (main_body.empty()) main_line = s->line;
      main_body.push_back(s);
    }
    if (!main_body.empty()) {
      temps_ = 0;
      used_locs_ = global_locs_;
      Decl d;
      d.kind = Decl::Kind::Define;
      d.name = Name("main");
      d.type = mk::top();
      d.body = stmts_exp(main_body, 0, Scope{}, [](Val) { return mk::val(undef()); }, true);
      d.line = main_line;
      out.decls.push_back(d);
    }
    return out;
  }

 private:
  Name temp() { return Name("t_" + std::to_string(++temps_)); }

  Location cell_loc(const std::string& base) {
    std::string name = "a_" + base;
    for (int k = 1; used_locs_.count(name); ++k) name = "a_" + base + "_" + std::to_string(k);
    used_locs_.insert(name);
    return Location::strong(Name(name));
  }

  Ty annot_type(const std::string& text, int line) {
    try {
      return parse_type(text, opts_);
    } catch (Error& e) {
      e.set_line(line);
      throw;
    }
  }

  // Binds a non-value expression to a temporary.
  Exp named(Exp e, const Cont& k) {
    if (auto* v = std::get_if<EVal>(&e->node)) return k(v->value);
    Name t = temp();
    Exp rest = k(mk::vvar(t));
    return mk::let(t, e, rest, e->line);
  }

  Exp seq(Exp a, Exp b) { return mk::let(Name("_"), a, b, a->line); }

  // -- functions ------------------------------------------------------------

  Decl define(const JFunc& f) {
    Decl d;
    d.kind = Decl::Kind::Define;
    d.name = Name(f.name);
    d.line = f.line;
    if (f.ctor) {
      Location lf = cell_loc(f.name);
      d.type = mk::ref_type(lf);
      d.body = ctor(f, Scope{}, lf);
      global_locs_.insert(lf.name.base);
      global_locs_.insert("a_" + f.name + "proto");
      return d;
    }
    d.type = annot_type(f.annot, f.line);
    Scope sc;
    if (mentions(f.body, f.name)) {
      d.body = fixed(f, sc, d.type);
    } else {
      d.body = mk::val(lambda(f, sc), f.line);
    }
    return d;
  }

  // DS-Func
  Val lambda(const JFunc& f, Scope scope) {
    scope["this"] = VarKind::Plain;
    scope["arguments"] = VarKind::Plain;
    std::vector<Name> temps;
    std::vector<Location> cells;
    for (auto& p : f.params) {
      scope[p] = VarKind::Cell;
      temps.push_back(temp());
      cells.push_back(cell_loc(p));
    }
    Exp body = mk::label(Name("return"), std::nullopt,
                         stmts_exp(f.body, 0, scope, [](Val) { return mk::val(undef()); }, true), f.line);
    for (std::size_t i = f.params.size(); i-- > 0;) {
      const Name& t = temps[i];
      const Location& a = cells[i];
      Exp bind = mk::let(Name(f.params[i]), mk::newref(a, mk::vvar(t), f.line), body, f.line);
      body = mk::let(t,
                     mk::app(mk::vvar(Name("get")),
                             mk::vtuple({mk::vvar(Name("arguments")), str(std::to_string(i))}), f.line),
                     bind, f.line);
    }
    return mk::vfun({Name("this"), Name("arguments")}, body);
  }

  // letrec f :: T = λ... is fix (λf. λ... as T)
  Exp fixed(const JFunc& f, Scope scope, const Ty& t) {
    scope[f.name] = VarKind::Plain;
    Val inner = lambda(f, scope);
    Ty tfix = fix_arg_type(t);
    Exp arg = mk::as(mk::val(mk::vfun({Name(f.name)}, mk::as(mk::val(inner), t, f.line)), f.line), tfix, f.line);
    return named(arg, [&](Val g) { return mk::app_inst({t}, {}, {}, mk::vvar(Name("fix")), g, f.line); });
  }

  static Ty fix_arg_type(const Ty& t) {
    UArrow a;
    a.heapvars.push_back(Name("Hfix"));
    a.input = World{Name("g"), t, HeapType{Name("Hfix"), {}}};
    a.output = World{Name("r"), t, HeapType{Name("Hfix"), {}}};
    return mk::refine(Name("f"), mk::has_typ(mk::var(Name("f")), mk::arrow(a)));
  }

  // DS-Ctor
  Exp ctor(const JFunc& f, const Scope& scope, const Location& lf) {
    Ty t = annot_type(f.annot, f.line);
    Val code = lambda(f, scope);
    Location lp = cell_loc(f.name + "proto");
    Name fn("f"), p("p"), c("c"), d("d");
    Val dict = mk::vextend(mk::vextend(mk::vconst(Constant::empty_dict()), str("__code__"), mk::vvar(c)),
                           str("prototype"), mk::vvar(p));
    return mk::let(
        fn, mk::val(code, f.line),
        mk::let(p, mk::newobj(lp, mk::vconst(Constant::empty_dict()), mk::vvar(Name("__ObjectProto")), f.line),
                mk::let(c, mk::as(mk::val(mk::vvar(fn), f.line), t, f.line),
                        mk::let(d, mk::val(dict, f.line),
                                mk::newobj(lf, mk::vvar(d), mk::vvar(Name("__FunctionProto")), f.line), f.line),
                        f.line),
                f.line),
        f.line);
  }

  Exp func_expr(const JFunc& f, const Scope& scope) {
    if (f.ctor) return ctor(f, scope, cell_loc(f.name.empty() ? "ctor" : f.name));
    Ty t = annot_type(f.annot, f.line);
    if (!f.name.empty() && mentions(f.body, f.name)) return fixed(f, scope, t);
    return mk::as(mk::val(lambda(f, scope), f.line), t, f.line);
  }

  // -- statements -----------------------------------------------------------

  // Desugars stmts[i..] followed by `done`; `fn_body` marks a function body
  // whose fall-through value is undefined.
  Exp stmts_exp(const std::vector<JS>& stmts, std::size_t i, const Scope& scope, const Cont& done, bool fn_body) {
    if (i == stmts.size()) return done(undef());
    const JStmt& s = *stmts[i];
    auto rest = [&](const Scope& sc) { return stmts_exp(stmts, i + 1, sc, done, fn_body); };
    switch (s.kind) {
      case JStmt::Kind::Decl: syntax_error(s.line, "declarations are only allowed at top level");
      case JStmt::Kind::Var:
        return expr(s.expr, scope, [&](Val v) {
          Scope sc = scope;
          sc[s.name] = VarKind::Cell;
          return mk::let(Name(s.name), mk::newref(cell_loc(s.name), v, s.line), rest(sc), s.line);
        });
      case JStmt::Kind::Func: {
        Scope sc = scope;
        sc[s.fn->name] = VarKind::Plain;
        Exp f = func_expr(*s.fn, scope);
        return mk::let(Name(s.fn->name), f, rest(sc), s.line);
      }
      case JStmt::Kind::Expr:
        return expr(s.expr, scope, [&](Val) { return rest(scope); });
      case JStmt::Kind::Return:
        // DS-Return
        return expr(s.expr, scope, [&](Val v) { return mk::brk(Name("return"), v, s.line); });
      case JStmt::Kind::Break:
        // DS-Break
        return mk::brk(Name("break"), undef(), s.line);
      case JStmt::Kind::Assert:
        // DS-Assert
        return expr(s.expr, scope, [&](Val v) {
          Ty t = mk::refine(Name("v"), mk::eq(mk::var(Name("v")), mk::cbool(true)));
          return seq(mk::as(mk::val(v, s.line), t, s.line), rest(scope));
        });
      case JStmt::Kind::Block: {
        Exp b = stmts_exp(s.body, 0, scope, [](Val) { return mk::val(undef()); }, false);
        return seq(b, rest(scope));
      }
      case JStmt::Kind::If:
        return expr(s.expr, scope, [&](Val c) {
          Exp a = stmts_exp(s.body, 0, scope, [](Val) { return mk::val(undef()); }, false);
          Exp b = s.has_alt ? stmts_exp(s.alt, 0, scope, [](Val) { return mk::val(undef()); }, false)
                            : mk::val(undef());
          return seq(mk::ife(c, a, b, s.line), rest(scope));
        });
      case JStmt::Kind::While:
        return seq(loop(s, scope), rest(scope));
    }
    (void)fn_body;
    return done(undef());
  }

  // DS-While
  Exp loop(const JStmt& s, const Scope& scope) {
    Ty t = annot_type(s.annot, s.line);
    Name loop_name("loop");
    Scope inner = scope;
    inner["loop"] = VarKind::Plain;
    Exp again = mk::app(mk::vvar(loop_name), undef(), s.line);
    Exp body = expr(s.expr, inner, [&](Val c) {
      Exp b = stmts_exp(s.body, 0, inner, [](Val) { return mk::val(undef()); }, false);
      return mk::ife(c, seq(b, again), mk::val(undef()), s.line);
    });
    Val fn = mk::vfun({Name("_")}, body);
    Exp arg = mk::as(mk::val(mk::vfun({loop_name}, mk::as(mk::val(fn), t, s.line)), s.line), fix_arg_type(t),
                     s.line);
    Exp letrec = named(arg, [&](Val g) {
      return mk::let(loop_name, mk::app_inst({t}, {}, {}, mk::vvar(Name("fix")), g, s.line),
                     mk::app(mk::vvar(loop_name), undef(), s.line), s.line);
    });
    return mk::label(Name("break"), std::nullopt, letrec, s.line);
  }

  // -- expressions ----------------------------------------------------------

  Val arguments(const std::vector<Val>& args) {
    Val d = mk::vconst(Constant::empty_dict());
    for (std::size_t i = 0; i < args.size(); ++i) d = mk::vextend(d, str(std::to_string(i)), args[i]);
    return d;
  }

  Exp exprs(const std::vector<JE>& es, std::size_t i, const Scope& scope, std::vector<Val>& acc,
            const std::function<Exp(std::vector<Val>&)>& k) {
    if (i == es.size()) return k(acc);
    return expr(es[i], scope, [&, i](Val v) {
      acc.push_back(v);
      Exp r = exprs(es, i + 1, scope, acc, k);
      acc.pop_back();
      return r;
    });
  }

  Exp call(Val f, Val self, const std::vector<Val>& args, const Cont& k, int line) {
    return named(mk::app(f, mk::vtuple({self, arguments(args)}), line), k);
  }

  Exp expr(const JE& e, const Scope& scope, const Cont& k) {
    if (!e) return k(undef());
    int line = e->line;
    switch (e->kind) {
      case JExpr::Kind::Num: return k(mk::vconst(Constant::integer(std::stoll(e->text))));
      case JExpr::Kind::Str: return k(str(e->text));
      case JExpr::Kind::Bool: return k(mk::vconst(Constant::boolean(e->text == "true")));
      case JExpr::Kind::Null: return k(mk::vconst(Constant::null()));
      case JExpr::Kind::Undef: return k(undef());
      case JExpr::Kind::Ident: {
        auto it = scope.find(e->text);
        if (it != scope.end() && it->second == VarKind::Cell) {
          return named(mk::deref(mk::vvar(Name(e->text)), line), k);
        }
        return k(mk::vvar(Name(e->text)));
      }
      case JExpr::Kind::Member:
        return expr(e->kids[0], scope, [&](Val o) {
          return named(mk::app(mk::vvar(Name("getPropObj")), mk::vtuple({o, str(e->text)}), line), k);
        });
      case JExpr::Kind::Index: {
        std::vector<Val> acc;
        return exprs(e->kids, 0, scope, acc, [&](std::vector<Val>& vs) {
          return named(mk::app(mk::vvar(Name("getPropObj")), mk::vtuple({vs[0], vs[1]}), line), k);
        });
      }
      case JExpr::Kind::Call: {
        const JE& callee = e->kids[0];
        std::vector<JE> args(e->kids.begin() + 1, e->kids.end());
        if (callee->kind == JExpr::Kind::Member) {
          return expr(callee->kids[0], scope, [&](Val o) {
            return named(mk::app(mk::vvar(Name("getPropObj")), mk::vtuple({o, str(callee->text)}), line),
                         [&](Val f) {
                           std::vector<Val> acc;
                           return exprs(args, 0, scope, acc,
                                        [&](std::vector<Val>& vs) { return call(f, o, vs, k, line); });
                         });
          });
        }
        return expr(callee, scope, [&](Val f) {
          std::vector<Val> acc;
          return exprs(args, 0, scope, acc, [&](std::vector<Val>& vs) { return call(f, undef(), vs, k, line); });
        });
      }
      case JExpr::Kind::Assign: {
        const JE& lhs = e->kids[0];
        if (lhs->kind == JExpr::Kind::Ident) {
          auto it = scope.find(lhs->text);
          if (it == scope.end() || it->second != VarKind::Cell) {
            syntax_error(line, "cannot assign to " + lhs->text + ": not a variable");
          }
          return expr(e->kids[1], scope, [&](Val v) {
            return named(mk::setref(mk::vvar(Name(lhs->text)), v, line), k);
          });
        }
        std::vector<JE> parts{lhs->kids[0]};
        if (lhs->kind == JExpr::Kind::Index) parts.push_back(lhs->kids[1]);
        parts.push_back(e->kids[1]);
        std::vector<Val> acc;
        return exprs(parts, 0, scope, acc, [&](std::vector<Val>& vs) {
          Val key = lhs->kind == JExpr::Kind::Index ? vs[1] : str(lhs->text);
          return named(mk::app(mk::vvar(Name("setPropObj")), mk::vtuple({vs[0], key, vs.back()}), line), k);
        });
      }
      case JExpr::Kind::Binary: {
        const std::string& op = e->text;
        if (op == "&&" || op == "||") {
          return expr(e->kids[0], scope, [&](Val a) {
            Exp other = expr(e->kids[1], scope, [](Val b) { return mk::val(b); });
            Exp same = mk::val(a, line);
            return named(op == "&&" ? mk::ife(a, other, same, line) : mk::ife(a, same, other, line), k);
          });
        }
        static const std::map<std::string, std::string> kOps = {
            {"+", "js_plus"}, {"-", "js_minus"}, {"<", "js_lt"},   {"<=", "js_le"},
            {">", "js_gt"},   {">=", "js_ge"},   {"===", "js_eq"}, {"!==", "js_neq"}};
        std::vector<Val> acc;
        return exprs(e->kids, 0, scope, acc, [&](std::vector<Val>& vs) {
          return named(mk::app(mk::vvar(Name(kOps.at(op))), mk::vtuple({vs[0], vs[1]}), line), k);
        });
      }
      case JExpr::Kind::Unary:
        return expr(e->kids[0], scope, [&](Val v) {
          return named(mk::app(mk::vvar(Name(e->text == "!" ? "js_not" : "js_neg")), v, line), k);
        });
      case JExpr::Kind::Func: return named(func_expr(*e->fn, scope), k);
      case JExpr::Kind::Object: {
        std::vector<JE> vals;
        for (auto& [_, f] : e->fields) vals.push_back(f);
        std::vector<Val> acc;
        return exprs(vals, 0, scope, acc, [&](std::vector<Val>& vs) {
          Val d = mk::vconst(Constant::empty_dict());
          for (std::size_t i = 0; i < vs.size(); ++i) d = mk::vextend(d, str(e->fields[i].first), vs[i]);
          return named(mk::newobj(cell_loc("obj"), d, mk::vvar(Name("__ObjectProto")), line), k);
        });
      }
      case JExpr::Kind::Thaw: {
        // DS-Thaw
        Location l = Parser(opts_).location(read_one(e->text));
        return expr(e->kids[0], scope, [&](Val v) { return named(mk::thaw(l, v, line), k); });
      }
      case JExpr::Kind::Freeze: {
        // DS-Freeze
        Parser p(opts_);
        Location l = p.location(read_one(e->text));
        ThawState th = p.thaw_state(read_one(e->state));
        return expr(e->kids[0], scope, [&](Val v) { return named(mk::freeze(l, th, v, line), k); });
      }
    }
    return k(undef());
  }

  ParseOptions opts_;
  int temps_ = 0;
  std::set<std::string> used_locs_;
  std::set<std::string> global_locs_;
  std::set<std::string> globals_;
};

}  // namespace

Program desugar_program(std::string_view source, ParseOptions opts) {
  JParser p(lex(source));
  std::vector<JS> stmts = p.program();
  Desugarer d(opts);
  return d.program(stmts);
}

}  // namespace dimp
