#ifndef PGCL_PARSER_HPP
#define PGCL_PARSER_HPP

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pgcl/domain.hpp"
#include "pgcl/syntax.hpp"

namespace pgcl {

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class TokKind { Ident, Int, Sym, End };

struct Token {
  TokKind kind;
  std::string text;
  int line, col;
};

inline bool is_ident_start(char c) { return std::isalpha(c) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(c) || c == '_'; }

inline std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](TokKind k, std::string t, int l, int c) {
    out.push_back(Token{k, std::move(t), l, c});
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(c)) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') { // comment to end of line
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    int l = line, co = col;
    if (is_ident_start(c)) {
      size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      push(TokKind::Ident, src.substr(i, j - i), l, co);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(c)) {
      size_t j = i;
      while (j < src.size() && std::isdigit(src[j])) ++j;
      push(TokKind::Int, src.substr(i, j - i), l, co);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    // multi-char symbols first
    auto two = src.substr(i, 2);
    if (two == ":=" || two == "<=" || two == ">=" || two == "!=" ||
        two == "[]" || two == "..") {
      push(TokKind::Sym, two, l, co);
      i += 2;
      col += 2;
      continue;
    }
    if (std::string("+-*/(){}[];,<>=!&|").find(c) != std::string::npos) {
      push(TokKind::Sym, std::string(1, c), l, co);
      ++i;
      ++col;
      continue;
    }
    throw SyntaxError(l, co, std::string("unexpected character '") + c + "'");
  }
  out.push_back(Token{TokKind::End, "", line, col});
  return out;
}

inline const std::set<std::string> kKeywords = {
    "skip", "if",  "else",    "while",    "true",   "false", "min",
    "max",  "monus", "abs",   "pow",      "mod",    "harmonic",
    "ite",  "iverson", "is_int"};

class Parser {
public:
  explicit Parser(const std::string& src) : toks_(tokenize(src)) {}

  // -- expressions ----------------------------------------------------------

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    while (peek_sym("+") || peek_sym("-")) {
      std::string op = next().text;
      ExprPtr r = parse_term();
      e = binary(op == "+" ? ExprKind::Add : ExprKind::Sub, e, r);
    }
    return e;
  }

  BExprPtr parse_bexpr() {
    BExprPtr b = parse_band();
    while (peek_sym("|")) {
      next();
      b = bor(b, parse_band());
    }
    return b;
  }

  ProgramPtr parse_stmt() {
    ProgramPtr p = parse_atom();
    if (peek_sym(";")) {
      next();
      if (at_stmt_start()) return seq(p, parse_stmt());
      return p; // trailing ';'
    }
    return p;
  }

  void expect_end() {
    if (cur().kind != TokKind::End) fail("trailing input");
  }

  bool at_end() const { return toks_[pos_].kind == TokKind::End; }

private:
  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    while (peek_sym("*") || peek_sym("/")) {
      std::string op = next().text;
      ExprPtr r = parse_factor();
      if (op == "/" && e->kind == ExprKind::Literal &&
          r->kind == ExprKind::Literal) {
        // fold rational literals so "1/2" round-trips as one constant
        e = lit(e->literal / r->literal);
      } else {
        e = binary(op == "*" ? ExprKind::Mul : ExprKind::Div, e, r);
      }
    }
    return e;
  }

  ExprPtr parse_factor() {
    const Token& t = cur();
    if (t.kind == TokKind::Int) {
      next();
      return lit(Rational::parse(t.text));
    }
    if (t.kind == TokKind::Sym && t.text == "-") {
      next();
      ExprPtr inner = parse_factor();
      if (inner->kind == ExprKind::Literal) return lit(-inner->literal);
      return unary(ExprKind::Neg, inner);
    }
    if (t.kind == TokKind::Sym && t.text == "(") {
      next();
      ExprPtr e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (t.kind == TokKind::Ident) {
      if (t.text == "min" || t.text == "max" || t.text == "monus" ||
          t.text == "pow" || t.text == "mod") {
        ExprKind k = t.text == "min"     ? ExprKind::Min
                     : t.text == "max"   ? ExprKind::Max
                     : t.text == "monus" ? ExprKind::Monus
                     : t.text == "pow"   ? ExprKind::Pow
                                         : ExprKind::Mod;
        next();
        expect_sym("(");
        ExprPtr a = parse_expr();
        expect_sym(",");
        ExprPtr b = parse_expr();
        expect_sym(")");
        return binary(k, a, b);
      }
      if (t.text == "abs" || t.text == "harmonic") {
        ExprKind k = t.text == "abs" ? ExprKind::Abs : ExprKind::Harmonic;
        next();
        expect_sym("(");
        ExprPtr a = parse_expr();
        expect_sym(")");
        return unary(k, a);
      }
      if (t.text == "ite") {
        next();
        expect_sym("(");
        BExprPtr c = parse_bexpr();
        expect_sym(",");
        ExprPtr a = parse_expr();
        expect_sym(",");
        ExprPtr b = parse_expr();
        expect_sym(")");
        return ite(c, a, b);
      }
      if (t.text == "iverson") {
        next();
        expect_sym("(");
        BExprPtr c = parse_bexpr();
        expect_sym(")");
        return iverson(c);
      }
      if (kKeywords.count(t.text))
        fail("keyword '" + t.text + "' is not an arithmetic expression");
      next();
      return var(t.text);
    }
    fail("expected expression");
  }

  BExprPtr parse_band() {
    BExprPtr b = parse_batom();
    while (peek_sym("&")) {
      next();
      b = band(b, parse_batom());
    }
    return b;
  }

  BExprPtr parse_batom() {
    const Token& t = cur();
    if (t.kind == TokKind::Sym && t.text == "!") {
      next();
      return bnot(parse_batom());
    }
    if (t.kind == TokKind::Ident && t.text == "true") {
      next();
      return btrue();
    }
    if (t.kind == TokKind::Ident && t.text == "false") {
      next();
      return bfalse();
    }
    if (t.kind == TokKind::Ident && t.text == "is_int") {
      next();
      expect_sym("(");
      ExprPtr a = parse_expr();
      expect_sym(")");
      return is_int(a);
    }
    // Either "expr cmp expr" or a parenthesised boolean expression; an
    // arithmetic comparison is attempted first and rolled back on failure.
    size_t save = pos_;
    try {
      ExprPtr a = parse_expr();
      CmpOp op = parse_cmp_op();
      ExprPtr b = parse_expr();
      return cmp(a, op, b);
    } catch (const SyntaxError&) {
      pos_ = save;
    }
    if (t.kind == TokKind::Sym && t.text == "(") {
      next();
      BExprPtr b = parse_bexpr();
      expect_sym(")");
      return b;
    }
    fail("expected boolean expression");
  }

  CmpOp parse_cmp_op() {
    static const std::vector<std::pair<std::string, CmpOp>> ops = {
        {"<=", CmpOp::Le}, {">=", CmpOp::Ge}, {"!=", CmpOp::Ne},
        {"<", CmpOp::Lt},  {">", CmpOp::Gt},  {"=", CmpOp::Eq}};
    for (const auto& [sym, op] : ops)
      if (peek_sym(sym)) {
        next();
        return op;
      }
    fail("expected comparison operator");
  }

  // -- statements -----------------------------------------------------------

  bool at_stmt_start() const {
    const Token& t = toks_[pos_];
    if (t.kind == TokKind::Sym && t.text == "{") return true;
    if (t.kind != TokKind::Ident) return false;
    if (t.text == "skip" || t.text == "if" || t.text == "while") return true;
    return !kKeywords.count(t.text); // assignment target
  }

  ProgramPtr parse_atom() {
    const Token& t = cur();
    if (t.kind == TokKind::Ident && t.text == "skip") {
      next();
      return skip();
    }
    if (t.kind == TokKind::Ident && t.text == "if") {
      next();
      expect_sym("(");
      BExprPtr g = parse_bexpr();
      expect_sym(")");
      ProgramPtr a = parse_block();
      expect_ident("else");
      ProgramPtr b = parse_block();
      return ifelse(g, a, b);
    }
    if (t.kind == TokKind::Ident && t.text == "while") {
      next();
      expect_sym("(");
      BExprPtr g = parse_bexpr();
      expect_sym(")");
      return whileloop(g, parse_block());
    }
    if (t.kind == TokKind::Sym && t.text == "{") {
      ProgramPtr a = parse_block();
      if (peek_sym("[]")) {
        next();
        return dchoice(a, parse_block());
      }
      expect_sym("[");
      ExprPtr p = parse_expr();
      expect_sym("]");
      return pchoice(a, p, parse_block());
    }
    if (t.kind == TokKind::Ident && !kKeywords.count(t.text)) {
      std::string name = t.text;
      next();
      expect_sym(":=");
      return assign(name, parse_expr());
    }
    fail("expected statement");
  }

  ProgramPtr parse_block() {
    expect_sym("{");
    ProgramPtr p = parse_stmt();
    expect_sym("}");
    return p;
  }

  // -- plumbing ---------------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  bool peek_sym(const std::string& s) const {
    return cur().kind == TokKind::Sym && cur().text == s;
  }

  void expect_sym(const std::string& s) {
    if (!peek_sym(s)) fail("expected '" + s + "'");
    next();
  }

  void expect_ident(const std::string& s) {
    if (cur().kind != TokKind::Ident || cur().text != s)
      fail("expected '" + s + "'");
    next();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    std::string got =
        t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.line, t.col, msg + ", got " + got);
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Entry points

inline ProgramPtr parse_program(const std::string& text) {
  detail::Parser p(text);
  ProgramPtr prog = p.parse_stmt();
  p.expect_end();
  return prog;
}

inline ExprPtr parse_expr(const std::string& text) {
  detail::Parser p(text);
  ExprPtr e = p.parse_expr();
  p.expect_end();
  return e;
}

inline BExprPtr parse_bexpr(const std::string& text) {
  detail::Parser p(text);
  BExprPtr b = p.parse_bexpr();
  p.expect_end();
  return b;
}

// ---------------------------------------------------------------------------
// Pretty printing (canonical form; parse_program(pretty_print(p)) == p)

inline std::string pretty_print(const BExprPtr& b);

inline std::string pretty_print(const ExprPtr& e) {
  switch (e->kind) {
  case ExprKind::Literal:
    // a bare fraction after a binary operator would rebind its '/', so
    // non-integer constants get their own parentheses
    if (!e->literal.is_integer()) return "(" + e->literal.str() + ")";
    return e->literal.str();
  case ExprKind::Variable:
    return e->name;
  case ExprKind::Add:
    return "(" + pretty_print(e->lhs) + " + " + pretty_print(e->rhs) + ")";
  case ExprKind::Sub:
    return "(" + pretty_print(e->lhs) + " - " + pretty_print(e->rhs) + ")";
  case ExprKind::Mul:
    return "(" + pretty_print(e->lhs) + " * " + pretty_print(e->rhs) + ")";
  case ExprKind::Div:
    return "(" + pretty_print(e->lhs) + " / " + pretty_print(e->rhs) + ")";
  case ExprKind::Neg:
    return "(-" + pretty_print(e->lhs) + ")";
  case ExprKind::Min:
    return "min(" + pretty_print(e->lhs) + ", " + pretty_print(e->rhs) + ")";
  case ExprKind::Max:
    return "max(" + pretty_print(e->lhs) + ", " + pretty_print(e->rhs) + ")";
  case ExprKind::Monus:
    return "monus(" + pretty_print(e->lhs) + ", " + pretty_print(e->rhs) + ")";
  case ExprKind::Abs:
    return "abs(" + pretty_print(e->lhs) + ")";
  case ExprKind::Pow:
    return "pow(" + pretty_print(e->lhs) + ", " + pretty_print(e->rhs) + ")";
  case ExprKind::Mod:
    return "mod(" + pretty_print(e->lhs) + ", " + pretty_print(e->rhs) + ")";
  case ExprKind::Harmonic:
    return "harmonic(" + pretty_print(e->lhs) + ")";
  case ExprKind::Ite:
    return "ite(" + pretty_print(e->cond) + ", " + pretty_print(e->lhs) +
           ", " + pretty_print(e->rhs) + ")";
  case ExprKind::Iverson:
    return "iverson(" + pretty_print(e->cond) + ")";
  }
  throw std::logic_error("unreachable");
}

inline std::string pretty_print(const BExprPtr& b) {
  switch (b->kind) {
  case BExprKind::True:
    return "true";
  case BExprKind::False:
    return "false";
  case BExprKind::Cmp: {
    static const char* sym[] = {"<", "<=", "=", "!=", ">=", ">"};
    return pretty_print(b->lhs) + " " + sym[static_cast<int>(b->op)] + " " +
           pretty_print(b->rhs);
  }
  case BExprKind::Not:
    return "!(" + pretty_print(b->blhs) + ")";
  case BExprKind::And:
    return "(" + pretty_print(b->blhs) + " & " + pretty_print(b->brhs) + ")";
  case BExprKind::Or:
    return "(" + pretty_print(b->blhs) + " | " + pretty_print(b->brhs) + ")";
  case BExprKind::IsInt:
    return "is_int(" + pretty_print(b->lhs) + ")";
  }
  throw std::logic_error("unreachable");
}

inline std::string pretty_print(const ProgramPtr& p) {
  switch (p->kind) {
  case StmtKind::Skip:
    return "skip";
  case StmtKind::Assign:
    return p->target + " := " + pretty_print(p->expr);
  case StmtKind::Seq:
    return pretty_print(p->first) + "; " + pretty_print(p->second);
  case StmtKind::If:
    return "if (" + pretty_print(p->guard) + ") { " + pretty_print(p->first) +
           " } else { " + pretty_print(p->second) + " }";
  case StmtKind::PChoice:
    return "{ " + pretty_print(p->first) + " } [" + pretty_print(p->expr) +
           "] { " + pretty_print(p->second) + " }";
  case StmtKind::DChoice:
    return "{ " + pretty_print(p->first) + " } [] { " +
           pretty_print(p->second) + " }";
  case StmtKind::While:
    return "while (" + pretty_print(p->guard) + ") { " +
           pretty_print(p->first) + " }";
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Certificates

/// Quasi-variant certificate: invariant I, variant V over program variables,
/// progress functions p and d over the reserved variable v.
struct CertificateNew {
  BExprPtr invariant;
  ExprPtr variant;
  ExprPtr prob;     // p(v), must evaluate into (0,1]
  ExprPtr decrease; // d(v), must evaluate into (0,inf)
};

/// Bounded integer-variant certificate: Low < VInt <= High, progress with
/// probability at least eps.
struct CertificateOld {
  BExprPtr invariant;
  ExprPtr vint;
  Rational low;
  Rational high;
  Rational eps;
};

/// Non-termination certificate: non-constant bounded exact martingale.
struct CertificateNonTerm {
  BExprPtr invariant;
  ExprPtr martingale;
  Rational bound;
};

using Certificate =
    std::variant<CertificateNew, CertificateOld, CertificateNonTerm>;

/// Name of the reserved argument of p and d (the current variant value).
inline const std::string kVariantArg = "v";

namespace detail {

inline std::map<std::string, std::string>
parse_key_values(const std::string& text,
                 const std::set<std::string>& allowed) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto ltrim = line.find_first_not_of(" \t\r");
    if (ltrim == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SyntaxError(lineno, 1, "expected 'key = value'");
    auto strip = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = strip(line.substr(0, eq));
    std::string val = strip(line.substr(eq + 1));
    if (!allowed.count(key))
      throw SyntaxError(lineno, 1, "unknown key '" + key + "'");
    if (kv.count(key))
      throw SyntaxError(lineno, 1, "duplicate key '" + key + "'");
    if (val.empty()) throw SyntaxError(lineno, 1, "empty value for '" + key + "'");
    kv[key] = val;
  }
  return kv;
}

inline const std::string& require(const std::map<std::string, std::string>& kv,
                                  const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw SyntaxError(0, 0, "missing field '" + key + "'");
  return it->second;
}

inline void check_vars_subset(const std::set<std::string>& got,
                              const std::set<std::string>& allowed,
                              const std::string& what) {
  for (const auto& v : got)
    if (!allowed.count(v))
      throw SyntaxError(0, 0, what + " may not reference '" + v + "'");
}

} // namespace detail

inline Certificate parse_certificate(const std::string& text) {
  static const std::set<std::string> allowed = {
      "kind", "invariant", "variant",    "prob", "decrease",
      "vint", "low",       "high",       "eps",  "martingale",
      "bound"};
  auto kv = detail::parse_key_values(text, allowed);
  const std::string& kind = detail::require(kv, "kind");

  if (kind == "ast-new") {
    CertificateNew c;
    c.invariant = parse_bexpr(detail::require(kv, "invariant"));
    c.variant = parse_expr(detail::require(kv, "variant"));
    c.prob = parse_expr(detail::require(kv, "prob"));
    c.decrease = parse_expr(detail::require(kv, "decrease"));
    detail::check_vars_subset(free_vars(c.prob), {kVariantArg}, "prob");
    detail::check_vars_subset(free_vars(c.decrease), {kVariantArg},
                              "decrease");
    auto prog_vars = free_vars(c.variant);
    auto inv_vars = free_vars(c.invariant);
    if (prog_vars.count(kVariantArg) || inv_vars.count(kVariantArg))
      throw SyntaxError(0, 0,
                        "'" + kVariantArg +
                            "' is reserved for prob/decrease arguments");
    return c;
  }
  if (kind == "ast-old") {
    CertificateOld c;
    c.invariant = parse_bexpr(detail::require(kv, "invariant"));
    c.vint = parse_expr(detail::require(kv, "vint"));
    c.low = Rational::parse(detail::require(kv, "low"));
    c.high = Rational::parse(detail::require(kv, "high"));
    c.eps = Rational::parse(detail::require(kv, "eps"));
    if (!(c.eps > Rational(0) && c.eps <= Rational(1)))
      throw SyntaxError(0, 0, "eps must satisfy 0 < eps <= 1");
    if (!(c.low < c.high))
      throw SyntaxError(0, 0, "low must be strictly below high");
    return c;
  }
  if (kind == "non-termination") {
    CertificateNonTerm c;
    c.invariant = parse_bexpr(detail::require(kv, "invariant"));
    c.martingale = parse_expr(detail::require(kv, "martingale"));
    c.bound = Rational::parse(detail::require(kv, "bound"));
    if (!(c.bound > Rational(0)))
      throw SyntaxError(0, 0, "bound must be positive");
    return c;
  }
  throw SyntaxError(0, 0, "unknown certificate kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Domains: "x=0..200, n=1..50:1/2"

inline Domain parse_domain(const std::string& text) {
  Domain dom;
  std::string entry;
  std::istringstream in(text);
  while (std::getline(in, entry, ',')) {
    auto strip = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r\n");
      auto b = s.find_last_not_of(" \t\r\n");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    entry = strip(entry);
    if (entry.empty()) continue;
    auto eq = entry.find('=');
    auto dots = entry.find("..");
    if (eq == std::string::npos || dots == std::string::npos || dots < eq)
      throw SyntaxError(1, 1, "expected 'var=lo..hi[:step]' in '" + entry + "'");
    DomainVar dv;
    dv.name = strip(entry.substr(0, eq));
    if (dv.name.empty()) throw SyntaxError(1, 1, "empty variable name");
    std::string rest = entry.substr(dots + 2);
    auto colon = rest.find(':');
    dv.lo = Rational::parse(strip(entry.substr(eq + 1, dots - eq - 1)));
    if (colon == std::string::npos) {
      dv.hi = Rational::parse(strip(rest));
      dv.step = Rational(1);
    } else {
      dv.hi = Rational::parse(strip(rest.substr(0, colon)));
      dv.step = Rational::parse(strip(rest.substr(colon + 1)));
    }
    if (dv.step <= Rational(0))
      throw SyntaxError(1, 1, "step must be positive in '" + entry + "'");
    if (dv.lo > dv.hi)
      throw SyntaxError(1, 1, "empty range in '" + entry + "'");
    dom.vars.push_back(std::move(dv));
  }
  if (dom.vars.empty()) throw SyntaxError(1, 1, "empty domain");
  return dom;
}

} // namespace pgcl

#endif
