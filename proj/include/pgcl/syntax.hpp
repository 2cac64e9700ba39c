#ifndef PGCL_SYNTAX_HPP
#define PGCL_SYNTAX_HPP

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pgcl/rational.hpp"

namespace pgcl {

struct Expr;
struct BExpr;
struct Program;
using ExprPtr = std::shared_ptr<const Expr>;
using BExprPtr = std::shared_ptr<const BExpr>;
using ProgramPtr = std::shared_ptr<const Program>;

/// Program state: finite map from variable names to exact rationals.
/// Lookup of an unbound variable is a hard error, never a default.
using State = std::map<std::string, Rational>;

// ---------------------------------------------------------------------------
// Arithmetic expressions

enum class ExprKind {
  Literal,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Min,
  Max,
  Monus,
  Abs,
  Pow,
  Mod,
  Harmonic,
  Ite,
  Iverson,
};

struct Expr {
  ExprKind kind;
  Rational literal;       // Literal
  std::string name;       // Variable
  ExprPtr lhs, rhs;       // binary ops; lhs only for unary
  BExprPtr cond;          // Ite, Iverson
};

enum class CmpOp { Lt, Le, Eq, Ne, Ge, Gt };

enum class BExprKind { True, False, Cmp, Not, And, Or, IsInt };

struct BExpr {
  BExprKind kind;
  CmpOp op;            // Cmp
  ExprPtr lhs, rhs;    // Cmp; lhs for IsInt
  BExprPtr blhs, brhs; // Not (blhs), And, Or
};

// Constructors ---------------------------------------------------------------

inline ExprPtr lit(Rational v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Literal;
  e->literal = std::move(v);
  return e;
}

inline ExprPtr var(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Variable;
  e->name = std::move(name);
  return e;
}

inline ExprPtr unary(ExprKind k, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->lhs = std::move(a);
  return e;
}

inline ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

inline ExprPtr ite(BExprPtr c, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Ite;
  e->cond = std::move(c);
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

inline ExprPtr iverson(BExprPtr c) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Iverson;
  e->cond = std::move(c);
  return e;
}

inline BExprPtr btrue() {
  auto b = std::make_shared<BExpr>();
  b->kind = BExprKind::True;
  return b;
}

inline BExprPtr bfalse() {
  auto b = std::make_shared<BExpr>();
  b->kind = BExprKind::False;
  return b;
}

inline BExprPtr cmp(ExprPtr a, CmpOp op, ExprPtr b) {
  auto c = std::make_shared<BExpr>();
  c->kind = BExprKind::Cmp;
  c->op = op;
  c->lhs = std::move(a);
  c->rhs = std::move(b);
  return c;
}

inline BExprPtr bnot(BExprPtr a) {
  auto c = std::make_shared<BExpr>();
  c->kind = BExprKind::Not;
  c->blhs = std::move(a);
  return c;
}

inline BExprPtr band(BExprPtr a, BExprPtr b) {
  auto c = std::make_shared<BExpr>();
  c->kind = BExprKind::And;
  c->blhs = std::move(a);
  c->brhs = std::move(b);
  return c;
}

inline BExprPtr bor(BExprPtr a, BExprPtr b) {
  auto c = std::make_shared<BExpr>();
  c->kind = BExprKind::Or;
  c->blhs = std::move(a);
  c->brhs = std::move(b);
  return c;
}

inline BExprPtr is_int(ExprPtr a) {
  auto c = std::make_shared<BExpr>();
  c->kind = BExprKind::IsInt;
  c->lhs = std::move(a);
  return c;
}

// ---------------------------------------------------------------------------
// Programs

enum class StmtKind { Skip, Assign, Seq, If, PChoice, DChoice, While };

struct Program {
  StmtKind kind;
  std::string target;        // Assign
  ExprPtr expr;              // Assign rhs; PChoice probability
  BExprPtr guard;            // If, While
  ProgramPtr first, second;  // Seq, If, PChoice, DChoice; first = While body
};

inline ProgramPtr skip() {
  auto p = std::make_shared<Program>();
  p->kind = StmtKind::Skip;
  return p;
}

inline ProgramPtr assign(std::string v, ExprPtr e) {
  auto p = std::make_shared<Program>();
  p->kind = StmtKind::Assign;
  p->target = std::move(v);
  p->expr = std::move(e);
  return p;
}

inline ProgramPtr seq(ProgramPtr a, ProgramPtr b) {
  auto p = std::make_shared<Program>();
  p->kind = StmtKind::Seq;
  p->first = std::move(a);
  p->second = std::move(b);
  return p;
}

inline ProgramPtr ifelse(BExprPtr g, ProgramPtr a, ProgramPtr b) {
  auto p = std::make_shared<Program>();
  p->kind = StmtKind::If;
  p->guard = std::move(g);
  p->first = std::move(a);
  p->second = std::move(b);
  return p;
}

inline ProgramPtr pchoice(ProgramPtr a, ExprPtr prob, ProgramPtr b) {
  auto p = std::make_shared<Program>();
  p->kind = StmtKind::PChoice;
  p->expr = std::move(prob);
  p->first = std::move(a);
  p->second = std::move(b);
  return p;
}

inline ProgramPtr dchoice(ProgramPtr a, ProgramPtr b) {
  auto p = std::make_shared<Program>();
  p->kind = StmtKind::DChoice;
  p->first = std::move(a);
  p->second = std::move(b);
  return p;
}

inline ProgramPtr whileloop(BExprPtr g, ProgramPtr body) {
  auto p = std::make_shared<Program>();
  p->kind = StmtKind::While;
  p->guard = std::move(g);
  p->first = std::move(body);
  return p;
}

// ---------------------------------------------------------------------------
// Evaluation

/// n-th harmonic number, H_0 = 0. Values are memoised process-wide; the
/// denominators grow like lcm(1..n), so recomputation would dominate the
/// checker otherwise.
inline const Rational& harmonic(long long n) {
  if (n < 0)
    throw EvalError(EvalError::Kind::NegativeArgument,
                    "harmonic of negative argument " + std::to_string(n));
  static std::vector<Rational> cache{Rational(0)};
  while (static_cast<long long>(cache.size()) <= n) {
    long long k = static_cast<long long>(cache.size());
    cache.push_back(cache.back() + Rational(1, k));
  }
  return cache[n];
}

bool eval_bexpr(const BExpr& b, const State& sigma);

inline Rational eval_expr(const Expr& e, const State& sigma) {
  switch (e.kind) {
  case ExprKind::Literal:
    return e.literal;
  case ExprKind::Variable: {
    auto it = sigma.find(e.name);
    if (it == sigma.end())
      throw EvalError(EvalError::Kind::UnboundVariable,
                      "unbound variable '" + e.name + "'");
    return it->second;
  }
  case ExprKind::Add:
    return eval_expr(*e.lhs, sigma) + eval_expr(*e.rhs, sigma);
  case ExprKind::Sub:
    return eval_expr(*e.lhs, sigma) - eval_expr(*e.rhs, sigma);
  case ExprKind::Mul:
    return eval_expr(*e.lhs, sigma) * eval_expr(*e.rhs, sigma);
  case ExprKind::Div:
    return eval_expr(*e.lhs, sigma) / eval_expr(*e.rhs, sigma);
  case ExprKind::Neg:
    return -eval_expr(*e.lhs, sigma);
  case ExprKind::Min:
    return min(eval_expr(*e.lhs, sigma), eval_expr(*e.rhs, sigma));
  case ExprKind::Max:
    return max(eval_expr(*e.lhs, sigma), eval_expr(*e.rhs, sigma));
  case ExprKind::Monus:
    return monus(eval_expr(*e.lhs, sigma), eval_expr(*e.rhs, sigma));
  case ExprKind::Abs:
    return abs(eval_expr(*e.lhs, sigma));
  case ExprKind::Pow:
    return pow(eval_expr(*e.lhs, sigma),
               eval_expr(*e.rhs, sigma).to_integer());
  case ExprKind::Mod:
    return mod_floor(eval_expr(*e.lhs, sigma), eval_expr(*e.rhs, sigma));
  case ExprKind::Harmonic: {
    Rational n = eval_expr(*e.lhs, sigma);
    BigInt k = n.to_integer();
    if (k < 0)
      throw EvalError(EvalError::Kind::NegativeArgument,
                      "harmonic of negative argument");
    return harmonic(k.convert_to<long long>());
  }
  case ExprKind::Ite:
    return eval_bexpr(*e.cond, sigma) ? eval_expr(*e.lhs, sigma)
                                      : eval_expr(*e.rhs, sigma);
  case ExprKind::Iverson:
    return Rational(eval_bexpr(*e.cond, sigma) ? 1 : 0);
  }
  throw std::logic_error("unreachable expression kind");
}

inline bool eval_cmp(CmpOp op, const Rational& a, const Rational& b) {
  int c = Rational::cmp(a, b);
  switch (op) {
  case CmpOp::Lt: return c < 0;
  case CmpOp::Le: return c <= 0;
  case CmpOp::Eq: return c == 0;
  case CmpOp::Ne: return c != 0;
  case CmpOp::Ge: return c >= 0;
  case CmpOp::Gt: return c > 0;
  }
  throw std::logic_error("unreachable comparison");
}

inline bool eval_bexpr(const BExpr& b, const State& sigma) {
  switch (b.kind) {
  case BExprKind::True:
    return true;
  case BExprKind::False:
    return false;
  case BExprKind::Cmp:
    return eval_cmp(b.op, eval_expr(*b.lhs, sigma), eval_expr(*b.rhs, sigma));
  case BExprKind::Not:
    return !eval_bexpr(*b.blhs, sigma);
  case BExprKind::And:
    return eval_bexpr(*b.blhs, sigma) && eval_bexpr(*b.brhs, sigma);
  case BExprKind::Or:
    return eval_bexpr(*b.blhs, sigma) || eval_bexpr(*b.brhs, sigma);
  case BExprKind::IsInt:
    return eval_expr(*b.lhs, sigma).is_integer();
  }
  throw std::logic_error("unreachable boolean kind");
}

inline Rational eval_expr(const ExprPtr& e, const State& sigma) {
  return eval_expr(*e, sigma);
}

inline bool eval_bexpr(const BExprPtr& b, const State& sigma) {
  return eval_bexpr(*b, sigma);
}

// ---------------------------------------------------------------------------
// Substitution f[x/e]

BExprPtr substitute(const BExprPtr& b, const std::string& x, const ExprPtr& e);

inline ExprPtr substitute(const ExprPtr& f, const std::string& x,
                          const ExprPtr& e) {
  if (!f) return f;
  switch (f->kind) {
  case ExprKind::Literal:
    return f;
  case ExprKind::Variable:
    return f->name == x ? e : f;
  default: {
    auto r = std::make_shared<Expr>(*f);
    r->lhs = substitute(f->lhs, x, e);
    r->rhs = substitute(f->rhs, x, e);
    r->cond = substitute(f->cond, x, e);
    return r;
  }
  }
}

inline BExprPtr substitute(const BExprPtr& b, const std::string& x,
                           const ExprPtr& e) {
  if (!b) return b;
  if (b->kind == BExprKind::True || b->kind == BExprKind::False) return b;
  auto r = std::make_shared<BExpr>(*b);
  r->lhs = substitute(b->lhs, x, e);
  r->rhs = substitute(b->rhs, x, e);
  r->blhs = substitute(b->blhs, x, e);
  r->brhs = substitute(b->brhs, x, e);
  return r;
}

// ---------------------------------------------------------------------------
// Free variables

inline void collect_vars(const ExprPtr& e, std::set<std::string>& out);

inline void collect_vars(const BExprPtr& b, std::set<std::string>& out) {
  if (!b) return;
  collect_vars(b->lhs, out);
  collect_vars(b->rhs, out);
  collect_vars(b->blhs, out);
  collect_vars(b->brhs, out);
}

inline void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Variable) {
    out.insert(e->name);
    return;
  }
  collect_vars(e->lhs, out);
  collect_vars(e->rhs, out);
  collect_vars(e->cond, out);
}

inline void collect_vars(const ProgramPtr& p, std::set<std::string>& out) {
  if (!p) return;
  if (p->kind == StmtKind::Assign) out.insert(p->target);
  collect_vars(p->expr, out);
  collect_vars(p->guard, out);
  collect_vars(p->first, out);
  collect_vars(p->second, out);
}

template <typename Node>
std::set<std::string> free_vars(const Node& n) {
  std::set<std::string> out;
  collect_vars(n, out);
  return out;
}

/// True iff the program contains a while loop anywhere.
inline bool has_loop(const ProgramPtr& p) {
  if (!p) return false;
  if (p->kind == StmtKind::While) return true;
  return has_loop(p->first) || has_loop(p->second);
}

// ---------------------------------------------------------------------------
// Structural equality (round-trip checks)

inline bool struct_eq(const BExprPtr& a, const BExprPtr& b);

inline bool struct_eq(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  if (a->kind == ExprKind::Literal) return a->literal == b->literal;
  if (a->kind == ExprKind::Variable) return a->name == b->name;
  return struct_eq(a->lhs, b->lhs) && struct_eq(a->rhs, b->rhs) &&
         struct_eq(a->cond, b->cond);
}

inline bool struct_eq(const BExprPtr& a, const BExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  if (a->kind == BExprKind::Cmp && a->op != b->op) return false;
  return struct_eq(a->lhs, b->lhs) && struct_eq(a->rhs, b->rhs) &&
         struct_eq(a->blhs, b->blhs) && struct_eq(a->brhs, b->brhs);
}

inline bool struct_eq(const ProgramPtr& a, const ProgramPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  if (a->kind == StmtKind::Assign && a->target != b->target) return false;
  return struct_eq(a->expr, b->expr) && struct_eq(a->guard, b->guard) &&
         struct_eq(a->first, b->first) && struct_eq(a->second, b->second);
}

} // namespace pgcl

#endif
