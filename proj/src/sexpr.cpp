#include "dimp/sexpr.hpp"

#include <cctype>

#include "dimp/error.hpp"

namespace dimp {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> all() {
    std::vector<SExpr> out;
    skip();
    while (pos_ < text_.size()) {
      out.push_back(datum());
      skip();
    }
    return out;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') ++line_;
        ++pos_;
      } else {
        break;
      }
    }
  }

  static bool delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '{' ||
           c == '}' || c == '"' || c == ';';
  }

  SExpr datum() {
    int line = line_;
    char c = text_[pos_];
    if (c == '(' || c == '{') {
      char close = c == '(' ? ')' : '}';
      ++pos_;
      std::vector<SExpr> items;
      skip();
      while (true) {
        if (pos_ >= text_.size()) fail(ErrorKind::Parse, "unterminated list", line);
        if (text_[pos_] == close) {
          ++pos_;
          break;
        }
        if (text_[pos_] == ')' || text_[pos_] == '}') {
          fail(ErrorKind::Parse, std::string("mismatched '") + text_[pos_] + "'", line_);
        }
        items.push_back(datum());
        skip();
      }
      SExpr e = SExpr::list(std::move(items), c);
      e.line = line;
      return e;
    }
    if (c == ')' || c == '}') fail(ErrorKind::Parse, std::string("unexpected '") + c + "'", line);
    if (c == '"') {
      ++pos_;
      std::string s;
      while (true) {
        if (pos_ >= text_.size()) fail(ErrorKind::Parse, "unterminated string", line);
        char d = text_[pos_++];
        if (d == '"') break;
        if (d == '\\') {
          if (pos_ >= text_.size()) fail(ErrorKind::Parse, "unterminated string", line);
          char esc = text_[pos_++];
          switch (esc) {
            case 'n': s += '\n'; break;
            case 't': s += '\t'; break;
            default: s += esc;
          }
        } else {
          if (d == '\n') ++line_;
          s += d;
        }
      }
      SExpr e = SExpr::string(std::move(s));
      e.line = line;
      return e;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && !delimiter(text_[pos_])) ++pos_;
    SExpr e = SExpr::atom(std::string(text_.substr(start, pos_ - start)));
    e.line = line;
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

char closing(char open) { return open == '{' ? '}' : ')'; }

void pretty(const SExpr& e, int indent, int width, std::string& out) {
  std::string flat = write_flat(e);
  if (e.kind != SExpr::Kind::List || indent + static_cast<int>(flat.size()) <= width ||
      e.items.size() < 2) {
    out += flat;
    return;
  }
  // Head and the first argument stay on the opening line when the head is
  // an atom; the remaining arguments are indented by two.
  out += e.bracket;
  std::size_t first_broken = 0;
  if (e.items[0].is_atom()) {
    out += e.items[0].text;
    first_broken = 1;
    if (e.items.size() > 2 && !e.items[1].is_list()) {
      out += ' ';
      out += write_flat(e.items[1]);
      first_broken = 2;
    }
  }
  for (std::size_t i = first_broken; i < e.items.size(); ++i) {
    if (i == 0) {
      pretty(e.items[i], indent + 1, width, out);
      continue;
    }
    out += '\n';
    out.append(indent + 2, ' ');
    pretty(e.items[i], indent + 2, width, out);
  }
  out += closing(e.bracket);
}

}  // namespace

std::vector<SExpr> read_sexprs(std::string_view text) { return Reader(text).all(); }

std::string write_flat(const SExpr& e) {
  switch (e.kind) {
    case SExpr::Kind::Atom: return e.text;
    case SExpr::Kind::String: return quote(e.text);
    case SExpr::Kind::List: {
      std::string out(1, e.bracket);
      for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i) out += ' ';
        out += write_flat(e.items[i]);
      }
      out += closing(e.bracket);
      return out;
    }
  }
  return {};
}

std::string write_pretty(const SExpr& e, int width) {
  std::string out;
  pretty(e, 0, width, out);
  return out;
}

}  // namespace dimp
