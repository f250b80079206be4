#include "strataform/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace strataform {
namespace io {

namespace {

enum class Tok { Ident, Number, Vector, LParen, RParen, LBracket, RBracket, Equals, Comma,
                 Semicolon, Colon, Plus, Minus, Star, Caret, Slash, Newline, End };

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Vector: return "vector symbol d/d<name>";
    case Tok::LParen: return "(";
    case Tok::RParen: return ")";
    case Tok::LBracket: return "[";
    case Tok::RBracket: return "]";
    case Tok::Equals: return "=";
    case Tok::Comma: return ",";
    case Tok::Semicolon: return ";";
    case Tok::Colon: return ":";
    case Tok::Plus: return "+";
    case Tok::Minus: return "-";
    case Tok::Star: return "*";
    case Tok::Caret: return "^";
    case Tok::Slash: return "/";
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Tok k, std::string s) { out.push_back({k, std::move(s), line, col}); };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') {
      push(Tok::Newline, "\n");
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    if (text.compare(i, 3, "d/d") == 0 && i + 3 < text.size() &&
        (std::isalnum(static_cast<unsigned char>(text[i + 3])) || text[i + 3] == '_')) {
      std::size_t j = i + 3;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      push(Tok::Vector, text.substr(i + 3, j - i - 3));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      push(Tok::Ident, text.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      push(Tok::Number, text.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    Tok k;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case '=': k = Tok::Equals; break;
      case ',': k = Tok::Comma; break;
      case ';': k = Tok::Semicolon; break;
      case ':': k = Tok::Colon; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '^': k = Tok::Caret; break;
      case '/': k = Tok::Slash; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, col, {});
    }
    push(k, std::string(1, c));
    ++i;
    ++col;
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

// Parsed algebraic value plus a literal-integer tag for resolving '^'.
struct Value {
  FieldValue v;
  std::optional<long> int_literal;

  bool is_scalar() const { return std::holds_alternative<Poly>(v); }
  const Poly& scalar() const { return std::get<Poly>(v); }
};

class Parser {
 public:
  Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool accept(Tok k) {
    if (at(k)) {
      ++pos_;
      return true;
    }
    return false;
  }
  Token expect(Tok k, std::vector<std::string> also = {}) {
    if (!at(k)) {
      also.insert(also.begin(), tok_name(k));
      fail("expected " + std::string(tok_name(k)), also);
    }
    return next();
  }
  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected = {}) const {
    throw ParseError(msg + " (found " + std::string(tok_name(peek().kind)) +
                         (peek().text.empty() || peek().kind == Tok::Newline ? "" : " '" + peek().text + "'") +
                         ")",
                     peek().line, peek().col, std::move(expected));
  }
  void skip_newlines() {
    while (accept(Tok::Newline)) {
    }
  }

  Rat parse_rat() {
    bool neg = accept(Tok::Minus);
    Token n = expect(Tok::Number);
    Rat r = Rat::parse(n.text);
    if (accept(Tok::Slash)) {
      Token d = expect(Tok::Number);
      r = r / Rat::parse(d.text);
    }
    return neg ? -r : r;
  }

  // --- expressions over a chart ------------------------------------------

  Value parse_expr(const ChartPtr& chart) {
    Value lhs = parse_term(chart);
    while (at(Tok::Plus) || at(Tok::Minus)) {
      bool minus = next().kind == Tok::Minus;
      Value rhs = parse_term(chart);
      lhs = combine_add(lhs, rhs, minus);
    }
    return lhs;
  }

 private:
  Value parse_term(const ChartPtr& chart) {
    Value lhs = parse_power(chart);
    while (at(Tok::Star)) {
      next();
      Value rhs = parse_power(chart);
      lhs = combine_mul(lhs, rhs);
    }
    return lhs;
  }

  Value parse_power(const ChartPtr& chart) {
    Value lhs = parse_atom(chart);
    while (at(Tok::Caret)) {
      next();
      Value rhs = parse_atom(chart);
      lhs = combine_caret(lhs, rhs);
    }
    return lhs;
  }

  Value parse_atom(const ChartPtr& chart) {
    const int n = chart->dim();
    if (accept(Tok::Minus)) {
      Value v = parse_atom(chart);
      if (auto* p = std::get_if<Poly>(&v.v)) return {FieldValue(-*p), std::nullopt};
      if (auto* f = std::get_if<PolyForm>(&v.v)) return {FieldValue(-*f), std::nullopt};
      return {FieldValue(-std::get<PolyMVec>(v.v)), std::nullopt};
    }
    if (at(Tok::Number)) {
      Token t = next();
      Rat r = Rat::parse(t.text);
      std::optional<long> lit;
      if (at(Tok::Slash)) {
        next();
        Token d = expect(Tok::Number);
        r = r / Rat::parse(d.text);
      } else {
        lit = std::stol(t.text);
      }
      return {FieldValue(Poly::constant(n, r)), lit};
    }
    if (at(Tok::Vector)) {
      Token t = next();
      int idx = chart->index_of(t.text);
      if (idx < 0) fail("unknown coordinate '" + t.text + "' in d/d" + t.text);
      PolyMVec v(chart, 1);
      v.add_term(IdxSet{idx}, Poly::constant(n, Rat(1)));
      return {FieldValue(std::move(v)), std::nullopt};
    }
    if (at(Tok::Ident)) {
      Token t = next();
      int idx = chart->index_of(t.text);
      if (idx >= 0) return {FieldValue(Poly::variable(n, idx)), std::nullopt};
      // Differential: 'd' + coordinate name.
      if (t.text.size() > 1 && t.text[0] == 'd') {
        int didx = chart->index_of(t.text.substr(1));
        if (didx >= 0) {
          PolyForm f(chart, 1);
          f.add_term(IdxSet{didx}, Poly::constant(n, Rat(1)));
          return {FieldValue(std::move(f)), std::nullopt};
        }
      }
      fail("unresolved name '" + t.text + "'",
           {"coordinate", "differential d<coordinate>", "number"});
    }
    if (accept(Tok::LParen)) {
      Value v = parse_expr(chart);
      expect(Tok::RParen);
      return v;
    }
    fail("expected an expression atom",
         {"number", "coordinate", "differential", "vector symbol", "("});
  }

  Value combine_add(Value a, Value b, bool minus) {
    if (a.is_scalar() && b.is_scalar())
      return {FieldValue(minus ? a.scalar() - b.scalar() : a.scalar() + b.scalar()), std::nullopt};
    // Scalar zero merges with anything.
    if (a.is_scalar() && a.scalar().is_zero()) {
      if (auto* f = std::get_if<PolyForm>(&b.v))
        return {FieldValue(minus ? -*f : *f), std::nullopt};
      if (auto* m = std::get_if<PolyMVec>(&b.v))
        return {FieldValue(minus ? -*m : *m), std::nullopt};
    }
    if (b.is_scalar() && b.scalar().is_zero()) return a;
    if (auto* fa = std::get_if<PolyForm>(&a.v))
      if (auto* fb = std::get_if<PolyForm>(&b.v))
        return {FieldValue(minus ? *fa - *fb : *fa + *fb), std::nullopt};
    if (auto* va = std::get_if<PolyMVec>(&a.v))
      if (auto* vb = std::get_if<PolyMVec>(&b.v))
        return {FieldValue(minus ? *va - *vb : *va + *vb), std::nullopt};
    fail("cannot add values of different kinds");
  }

  Value combine_mul(Value a, Value b) {
    if (a.is_scalar() && b.is_scalar())
      return {FieldValue(a.scalar() * b.scalar()), std::nullopt};
    if (a.is_scalar()) {
      if (auto* f = std::get_if<PolyForm>(&b.v)) return {FieldValue(scale(*f, a.scalar())), std::nullopt};
      if (auto* m = std::get_if<PolyMVec>(&b.v)) return {FieldValue(scale(*m, a.scalar())), std::nullopt};
    }
    if (b.is_scalar()) {
      if (auto* f = std::get_if<PolyForm>(&a.v)) return {FieldValue(scale(*f, b.scalar())), std::nullopt};
      if (auto* m = std::get_if<PolyMVec>(&a.v)) return {FieldValue(scale(*m, b.scalar())), std::nullopt};
    }
    fail("'*' multiplies scalars; use '^' to wedge forms");
  }

  template <class T>
  static T scale(const T& t, const Poly& s) {
    T r(t.chart(), t.degree());
    for (auto& [idx, c] : t.comps()) r.add_term(idx, c * s);
    return r;
  }

  Value combine_caret(Value a, Value b) {
    if (a.is_scalar() && b.int_literal) {
      long e = *b.int_literal;
      if (e < 0) fail("negative power");
      return {FieldValue(a.scalar().pow(static_cast<int>(e))), std::nullopt};
    }
    if (auto* fa = std::get_if<PolyForm>(&a.v))
      if (auto* fb = std::get_if<PolyForm>(&b.v)) return {FieldValue(wedge(*fa, *fb)), std::nullopt};
    if (auto* va = std::get_if<PolyMVec>(&a.v))
      if (auto* vb = std::get_if<PolyMVec>(&b.v)) return {FieldValue(wedge(*va, *vb)), std::nullopt};
    fail("'^' is a power on scalars (integer exponent) or a wedge of forms");
  }

  std::size_t pos_ = 0;
  std::vector<Token> toks_;
};

PolyForm as_form(const Value& v, const ChartPtr& chart, Parser& p, int want_degree = -1) {
  if (auto* f = std::get_if<PolyForm>(&v.v)) return *f;
  if (v.is_scalar() && v.scalar().is_zero())
    return PolyForm(chart, want_degree < 0 ? 0 : want_degree);
  if (v.is_scalar()) {
    PolyForm f(chart, 0);
    f.add_term(IdxSet{}, v.scalar());
    return f;
  }
  p.fail("expected a differential form");
}

PolyMVec as_mvec(const Value& v, const ChartPtr& chart, Parser& p) {
  if (auto* m = std::get_if<PolyMVec>(&v.v)) return *m;
  if (v.is_scalar() && v.scalar().is_zero()) return PolyMVec(chart, 1);
  p.fail("expected a vector field expression");
}

}  // namespace

const ChartPtr& Manifest::chart(const std::string& name) const {
  auto it = charts.find(name);
  if (it == charts.end()) throw std::invalid_argument("manifest: unknown chart '" + name + "'");
  return it->second;
}

stratify::FormField Manifest::form_field(const std::string& name) const {
  auto it = forms.find(name);
  if (it == forms.end()) throw std::invalid_argument("manifest: unknown form '" + name + "'");
  return stratify::FormField(it->second.second.form, it->second.second.declared_closed);
}

Manifest parse_manifest(const std::string& text) {
  Parser p(lex(text));
  Manifest m;
  p.skip_newlines();
  // Header line: manifest v1.
  Token h = p.expect(Tok::Ident, {"manifest header"});
  if (h.text != "manifest") throw ParseError("expected 'manifest v1' header", h.line, h.col, {"manifest"});
  Token v = p.expect(Tok::Ident, {"v1"});
  if (v.text != "v1") throw ParseError("unsupported manifest version '" + v.text + "'", v.line, v.col, {"v1"});
  p.skip_newlines();

  auto named_chart = [&](const std::string& name, const Token& at) -> const ChartPtr& {
    auto it = m.charts.find(name);
    if (it == m.charts.end())
      throw ParseError("unknown chart '" + name + "'", at.line, at.col, {"declared chart name"});
    return it->second;
  };

  while (!p.at(Tok::End)) {
    Token kw = p.expect(Tok::Ident, {"statement keyword"});
    const std::string k = kw.text;
    if (k == "chart") {
      Token name = p.expect(Tok::Ident);
      p.expect(Tok::LParen);
      std::vector<std::string> coords;
      coords.push_back(p.expect(Tok::Ident).text);
      while (p.accept(Tok::Comma)) coords.push_back(p.expect(Tok::Ident).text);
      p.expect(Tok::RParen);
      std::vector<std::string> fibers;
      if (p.at(Tok::Ident) && p.peek().text == "fibers") {
        p.next();
        p.expect(Tok::LParen);
        fibers.push_back(p.expect(Tok::Ident).text);
        while (p.accept(Tok::Comma)) fibers.push_back(p.expect(Tok::Ident).text);
        p.expect(Tok::RParen);
      }
      m.charts[name.text] =
          fibers.empty() ? Chart::make(coords) : Chart::make_split(coords, fibers);
    } else if (k == "form" || k == "scalar" || k == "vector") {
      Token name = p.expect(Tok::Ident);
      Token on = p.expect(Tok::Ident);
      if (on.text != "on") throw ParseError("expected 'on'", on.line, on.col, {"on"});
      Token chart_name = p.expect(Tok::Ident);
      const ChartPtr& chart = named_chart(chart_name.text, chart_name);
      p.expect(Tok::Equals);
      Value val = p.parse_expr(chart);
      if (k == "scalar") {
        if (!val.is_scalar()) p.fail("scalar declaration holds a non-scalar value");
        m.scalars[name.text] = {chart_name.text, val.scalar()};
      } else if (k == "vector") {
        m.vectors[name.text] = {chart_name.text, as_mvec(val, chart, p)};
      } else {
        FormEntry entry;
        entry.form = as_form(val, chart, p, 2);
        while (p.accept(Tok::Comma)) {
          Token attr = p.expect(Tok::Ident, {"closed"});
          if (attr.text == "closed") {
            if (p.accept(Tok::Equals)) {
              Token b = p.expect(Tok::Ident, {"true", "false"});
              entry.declared_closed = b.text == "true";
            } else {
              entry.declared_closed = true;
            }
          } else {
            throw ParseError("unknown form attribute '" + attr.text + "'", attr.line, attr.col,
                             {"closed"});
          }
        }
        if (entry.declared_closed && !exterior_d(entry.form).is_zero())
          throw ParseError("form '" + name.text + "' declared closed but d != 0", name.line,
                           name.col, {});
        m.forms[name.text] = {chart_name.text, std::move(entry)};
      }
    } else if (k == "frame") {
      Token name = p.expect(Tok::Ident);
      Token on = p.expect(Tok::Ident);
      if (on.text != "on") throw ParseError("expected 'on'", on.line, on.col, {"on"});
      Token chart_name = p.expect(Tok::Ident);
      const ChartPtr& chart = named_chart(chart_name.text, chart_name);
      p.expect(Tok::Equals);
      p.expect(Tok::LBracket);
      std::vector<PolyMVec> fields;
      fields.push_back(as_mvec(p.parse_expr(chart), chart, p));
      while (p.accept(Tok::Comma)) fields.push_back(as_mvec(p.parse_expr(chart), chart, p));
      p.expect(Tok::RBracket);
      m.frames[name.text] = {chart_name.text, std::move(fields)};
    } else if (k == "point") {
      Token name = p.expect(Tok::Ident);
      Token on = p.expect(Tok::Ident);
      if (on.text != "on") throw ParseError("expected 'on'", on.line, on.col, {"on"});
      Token chart_name = p.expect(Tok::Ident);
      const ChartPtr& chart = named_chart(chart_name.text, chart_name);
      p.expect(Tok::Equals);
      p.expect(Tok::LParen);
      std::vector<Rat> coords;
      coords.push_back(p.parse_rat());
      while (p.accept(Tok::Comma)) coords.push_back(p.parse_rat());
      p.expect(Tok::RParen);
      if (static_cast<int>(coords.size()) != chart->dim())
        throw ParseError("point has " + std::to_string(coords.size()) + " coordinates, chart needs " +
                             std::to_string(chart->dim()),
                         name.line, name.col, {});
      RatVec x(static_cast<int>(coords.size()));
      for (std::size_t i = 0; i < coords.size(); ++i) x(static_cast<int>(i)) = coords[i];
      m.points[name.text] = {chart_name.text, std::move(x)};
    } else if (k == "tube") {
      Token name = p.expect(Tok::Ident);
      Token on = p.expect(Tok::Ident);
      if (on.text != "on") throw ParseError("expected 'on'", on.line, on.col, {"on"});
      Token chart_name = p.expect(Tok::Ident);
      named_chart(chart_name.text, chart_name);
      p.expect(Tok::Equals);
      p.expect(Tok::LParen);
      TubeEntry entry;
      Token f = p.expect(Tok::Ident, {"fibers"});
      if (f.text != "fibers") throw ParseError("expected 'fibers'", f.line, f.col, {"fibers"});
      p.expect(Tok::Colon);
      while (p.at(Tok::Ident)) {
        entry.fiber_names.push_back(p.next().text);
        if (!p.accept(Tok::Comma)) break;
      }
      if (p.accept(Tok::Semicolon)) {
        Token s = p.expect(Tok::Ident, {"scale"});
        if (s.text != "scale") throw ParseError("expected 'scale'", s.line, s.col, {"scale"});
        p.expect(Tok::Colon);
        entry.scale = p.parse_rat();
      }
      p.expect(Tok::RParen);
      m.tubes[name.text] = {chart_name.text, std::move(entry)};
    } else if (k == "param") {
      Token key = p.expect(Tok::Ident);
      p.expect(Tok::Equals);
      std::string value;
      while (!p.at(Tok::Newline) && !p.at(Tok::End)) {
        if (!value.empty()) value += " ";
        value += p.next().text;
      }
      m.params[key.text] = value;
    } else {
      throw ParseError("unknown statement '" + k + "'", kw.line, kw.col,
                       {"chart", "form", "scalar", "frame", "vector", "point", "tube", "param"});
    }
    if (!p.at(Tok::End)) p.expect(Tok::Newline, {"end of statement"});
    p.skip_newlines();
  }
  return m;
}

std::string print_poly(const Poly& p, const ChartPtr& chart) { return p.str(chart->names()); }

namespace {

template <class T>
std::string print_components(const T& t, bool covariant) {
  if (t.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (auto& [idx, c] : t.comps()) {
    std::string coeff = c.str(t.chart()->names());
    std::string base = idx_str(idx, t.chart(), covariant);
    std::string term;
    if (idx.empty())
      term = coeff;
    else if (coeff == "1")
      term = base;
    else if (c.terms().size() == 1 && c.constant_term().is_zero() && coeff.find('-') != 0)
      term = coeff + "*" + base;  // single monomial, no sign ambiguity
    else if (c.terms().size() == 1 && coeff.find('-') != 0)
      term = coeff + "*" + base;
    else
      term = "(" + coeff + ")*" + base;
    out += (first ? "" : " + ") + term;
    first = false;
  }
  return out;
}

}  // namespace

std::string print_form(const PolyForm& f) { return print_components(f, true); }
std::string print_mvec(const PolyMVec& v) { return print_components(v, false); }

Poly parse_scalar_expr(const std::string& text, const ChartPtr& chart) {
  Parser p(lex(text));
  Value v = p.parse_expr(chart);
  if (!v.is_scalar()) throw ParseError("expected a scalar expression", 1, 1, {});
  return v.scalar();
}

PolyForm parse_form_expr(const std::string& text, const ChartPtr& chart) {
  Parser p(lex(text));
  Value v = p.parse_expr(chart);
  return as_form(v, chart, p);
}

PolyMVec parse_vector_expr(const std::string& text, const ChartPtr& chart) {
  Parser p(lex(text));
  Value v = p.parse_expr(chart);
  return as_mvec(v, chart, p);
}

}  // namespace io
}  // namespace strataform
