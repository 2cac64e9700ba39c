#ifndef PGCL_OPERATIONAL_HPP
#define PGCL_OPERATIONAL_HPP

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "pgcl/syntax.hpp"

namespace pgcl {

// ---------------------------------------------------------------------------
// RNG: splitmix64, seedable and reproducible across platforms

struct RngStream {
  std::uint64_t state;

  explicit RngStream(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t x) {
    RngStream r(x);
    return r.next();
  }

  /// Uniform integer in [0, bound), bound >= 1. Lemire's multiply-shift with
  /// rejection keeps it exactly uniform.
  std::uint64_t bounded(std::uint64_t bound) {
    unsigned __int128 m =
        static_cast<unsigned __int128>(next()) * bound;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }
};

/// Exact Bernoulli(a/b) in lowest terms: uniform k in [0,b), true iff k < a.
inline bool rng_bernoulli(const Rational& p, RngStream& rng) {
  if (p.is_zero()) return false;
  if (p.is_one()) return true;
  if (p < Rational(0) || p > Rational(1))
    throw EvalError(EvalError::Kind::ProbabilityOutOfRange,
                    "probability " + p.str() + " outside [0,1]");
  if (p.is_small()) {
    std::uint64_t a = static_cast<std::uint64_t>(p.num_small());
    std::uint64_t b = static_cast<std::uint64_t>(p.den_small());
    return rng.bounded(b) < a;
  }
  // big denominator: rejection sample k uniform below b, chunked 64 bits
  BigInt a = p.numerator_big(), b = p.denominator_big();
  std::size_t bits = msb(b) + 1;
  std::size_t words = (bits + 63) / 64;
  for (;;) {
    BigInt k = 0;
    for (std::size_t w = 0; w < words; ++w) k = (k << 64) | BigInt(rng.next());
    k >>= (words * 64 - bits);
    if (k < b) return k < a;
  }
}

// ---------------------------------------------------------------------------
// Schedulers for demonic choice

struct Scheduler {
  enum class Policy { Left, Right, Alternate, Random, GreedyMin };
  Policy policy = Policy::Left;
  ExprPtr objective; // GreedyMin only

  static Scheduler left() { return {Policy::Left, nullptr}; }
  static Scheduler right() { return {Policy::Right, nullptr}; }
  static Scheduler alternate() { return {Policy::Alternate, nullptr}; }
  static Scheduler random() { return {Policy::Random, nullptr}; }
  static Scheduler greedy_min(ExprPtr e) {
    return {Policy::GreedyMin, std::move(e)};
  }
};

namespace detail {

/// One-step expected value of e after running a loop-free fragment,
/// expressed symbolically (nested demonic choice resolved greedily by min;
/// loops contribute no lookahead).
inline ExprPtr lookahead_expr(const ProgramPtr& prog, const ExprPtr& e) {
  switch (prog->kind) {
  case StmtKind::Skip:
    return e;
  case StmtKind::Assign:
    return substitute(e, prog->target, prog->expr);
  case StmtKind::Seq:
    return lookahead_expr(prog->first, lookahead_expr(prog->second, e));
  case StmtKind::If:
    return ite(prog->guard, lookahead_expr(prog->first, e),
               lookahead_expr(prog->second, e));
  case StmtKind::PChoice: {
    ExprPtr a = lookahead_expr(prog->first, e);
    ExprPtr b = lookahead_expr(prog->second, e);
    return binary(
        ExprKind::Add, binary(ExprKind::Mul, prog->expr, a),
        binary(ExprKind::Mul,
               binary(ExprKind::Sub, lit(Rational(1)), prog->expr), b));
  }
  case StmtKind::DChoice:
    return binary(ExprKind::Min, lookahead_expr(prog->first, e),
                  lookahead_expr(prog->second, e));
  case StmtKind::While:
    return e;
  }
  throw std::logic_error("unreachable");
}

/// Affine view of an expression: sum of coeff*var plus a constant. Used to
/// turn greedy scheduler comparisons into static or single-compare decisions.
struct LinForm {
  std::map<std::string, Rational> coeff;
  Rational constant;
};

inline std::optional<LinForm> linear_form(const ExprPtr& e) {
  switch (e->kind) {
  case ExprKind::Literal:
    return LinForm{{}, e->literal};
  case ExprKind::Variable:
    return LinForm{{{e->name, Rational(1)}}, Rational(0)};
  case ExprKind::Add:
  case ExprKind::Sub: {
    auto a = linear_form(e->lhs), b = linear_form(e->rhs);
    if (!a || !b) return std::nullopt;
    bool add = e->kind == ExprKind::Add;
    for (const auto& [k, v] : b->coeff)
      a->coeff[k] = a->coeff[k] + (add ? v : -v);
    a->constant = add ? a->constant + b->constant : a->constant - b->constant;
    return a;
  }
  case ExprKind::Neg: {
    auto a = linear_form(e->lhs);
    if (!a) return std::nullopt;
    for (auto& [k, v] : a->coeff) v = -v;
    a->constant = -a->constant;
    return a;
  }
  case ExprKind::Mul: {
    auto a = linear_form(e->lhs), b = linear_form(e->rhs);
    if (!a || !b) return std::nullopt;
    if (!a->coeff.empty() && !b->coeff.empty()) return std::nullopt;
    if (!a->coeff.empty()) std::swap(a, b);
    for (auto& [k, v] : b->coeff) v = v * a->constant;
    b->constant = b->constant * a->constant;
    return b;
  }
  case ExprKind::Div: {
    auto a = linear_form(e->lhs), b = linear_form(e->rhs);
    if (!a || !b || !b->coeff.empty() || b->constant.is_zero())
      return std::nullopt;
    for (auto& [k, v] : a->coeff) v = v / b->constant;
    a->constant = a->constant / b->constant;
    return a;
  }
  default:
    return std::nullopt;
  }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Compiled form: slot-resolved expressions and a flat pc machine

namespace machine {

struct CExpr {
  ExprKind kind;
  Rational literal;
  int slot = -1;
  const CExpr* a = nullptr;
  const CExpr* b = nullptr;
  const struct CBExpr* c = nullptr;
};

struct CBExpr {
  BExprKind kind;
  CmpOp op = CmpOp::Eq;
  const CExpr* a = nullptr;
  const CExpr* b = nullptr;
  const CBExpr* x = nullptr;
  const CBExpr* y = nullptr;
};

struct Instr {
  enum class Op : std::uint8_t {
    Skip,
    Assign,
    AssignIncr,   // regs[slot] = regs[src] + delta
    If,
    IfCmp,        // guard is regs[src] <op> cmp_rhs
    PChoice,
    PChoiceConst, // probability is the fixed small rational pa/pb
    DChoice,
    DChoiceCmp,   // greedy decision reduced to regs[src] <op> cmp_rhs
    While,
    WhileCmp
  };
  Op op;
  int slot = -1;
  int src = -1;
  const CExpr* expr = nullptr;   // assign rhs / pchoice probability
  const CBExpr* guard = nullptr; // if / while
  CmpOp cmp_op = CmpOp::Eq;
  Rational cmp_rhs;
  Rational delta;
  std::uint64_t pa = 0, pb = 1;
  int next = -1;                 // fallthrough; while: guard-false exit
  int left = -1, right = -1;     // branch targets
  const CExpr* look_left = nullptr; // greedy-min lookahead values
  const CExpr* look_right = nullptr;
};

struct Regs {
  std::vector<Rational> value;
  std::vector<char> defined;
};

class Compiled {
public:
  Compiled(const ProgramPtr& prog, const Scheduler& sched) : sched_(sched) {
    for (const auto& v : free_vars(prog)) slot_of(v);
    if (sched.objective)
      for (const auto& v : free_vars(sched.objective)) slot_of(v);
    entry_ = compile_stmt(prog, -1);
  }

  const std::vector<std::string>& variables() const { return names_; }

  Regs make_regs(const State& init) const {
    Regs r;
    r.value.resize(names_.size());
    r.defined.assign(names_.size(), 0);
    for (const auto& [k, v] : init) {
      auto it = slots_.find(k);
      if (it == slots_.end()) continue; // harmless extra binding
      r.value[it->second] = v;
      r.defined[it->second] = 1;
    }
    return r;
  }

  int entry() const { return entry_; }

  /// Executes one instruction; returns the next pc (-1 = terminated).
  int step(int pc, Regs& regs, RngStream& rng, std::uint64_t& flip) const {
    const Instr& in = code_[pc];
    switch (in.op) {
    case Instr::Op::Skip:
      return in.next;
    case Instr::Op::Assign: {
      Rational v = eval(in.expr, regs);
      regs.value[in.slot] = std::move(v);
      regs.defined[in.slot] = 1;
      return in.next;
    }
    case Instr::Op::AssignIncr: {
      if (!regs.defined[in.src])
        throw EvalError(EvalError::Kind::UnboundVariable,
                        "unbound variable '" + names_[in.src] + "'");
      regs.value[in.slot] = regs.value[in.src] + in.delta;
      regs.defined[in.slot] = 1;
      return in.next;
    }
    case Instr::Op::If:
      return eval_b(in.guard, regs) ? in.left : in.right;
    case Instr::Op::IfCmp:
      return fast_cmp(in, regs) ? in.left : in.right;
    case Instr::Op::While:
      return eval_b(in.guard, regs) ? in.left : in.next;
    case Instr::Op::WhileCmp:
      return fast_cmp(in, regs) ? in.left : in.next;
    case Instr::Op::PChoice: {
      Rational p = eval(in.expr, regs);
      return rng_bernoulli(p, rng) ? in.left : in.right;
    }
    case Instr::Op::PChoiceConst:
      return rng.bounded(in.pb) < in.pa ? in.left : in.right;
    case Instr::Op::DChoiceCmp:
      return fast_cmp(in, regs) ? in.left : in.right;
    case Instr::Op::DChoice:
      switch (sched_.policy) {
      case Scheduler::Policy::Left:
        return in.left;
      case Scheduler::Policy::Right:
        return in.right;
      case Scheduler::Policy::Alternate:
        return (flip++ & 1) ? in.right : in.left;
      case Scheduler::Policy::Random:
        return (rng.next() >> 63) ? in.right : in.left;
      case Scheduler::Policy::GreedyMin:
        return eval(in.look_left, regs) <= eval(in.look_right, regs)
                   ? in.left
                   : in.right;
      }
      return in.left;
    }
    throw std::logic_error("unreachable");
  }

  Rational eval(const CExpr* e, const Regs& regs) const {
    switch (e->kind) {
    case ExprKind::Literal:
      return e->literal;
    case ExprKind::Variable:
      if (!regs.defined[e->slot])
        throw EvalError(EvalError::Kind::UnboundVariable,
                        "unbound variable '" + names_[e->slot] + "'");
      return regs.value[e->slot];
    case ExprKind::Add:
      return eval(e->a, regs) + eval(e->b, regs);
    case ExprKind::Sub:
      return eval(e->a, regs) - eval(e->b, regs);
    case ExprKind::Mul:
      return eval(e->a, regs) * eval(e->b, regs);
    case ExprKind::Div: {
      Rational d = eval(e->b, regs);
      if (d.is_zero())
        throw EvalError(EvalError::Kind::DivisionByZero, "division by zero");
      return eval(e->a, regs) / d;
    }
    case ExprKind::Neg:
      return -eval(e->a, regs);
    case ExprKind::Min:
      return min(eval(e->a, regs), eval(e->b, regs));
    case ExprKind::Max:
      return max(eval(e->a, regs), eval(e->b, regs));
    case ExprKind::Monus:
      return monus(eval(e->a, regs), eval(e->b, regs));
    case ExprKind::Abs:
      return abs(eval(e->a, regs));
    case ExprKind::Pow: {
      Rational ex = eval(e->b, regs);
      return pow(eval(e->a, regs), ex.to_integer());
    }
    case ExprKind::Mod:
      return mod_floor(eval(e->a, regs), eval(e->b, regs));
    case ExprKind::Harmonic: {
      BigInt k = eval(e->a, regs).to_integer();
      if (k < 0)
        throw EvalError(EvalError::Kind::NegativeArgument,
                        "harmonic of negative argument");
      return harmonic(k.convert_to<long long>());
    }
    case ExprKind::Ite:
      return eval_b(e->c, regs) ? eval(e->a, regs) : eval(e->b, regs);
    case ExprKind::Iverson:
      return eval_b(e->c, regs) ? Rational(1) : Rational(0);
    }
    throw std::logic_error("unreachable");
  }

  bool fast_cmp(const Instr& in, const Regs& regs) const {
    if (!regs.defined[in.src])
      throw EvalError(EvalError::Kind::UnboundVariable,
                      "unbound variable '" + names_[in.src] + "'");
    return eval_cmp(in.cmp_op, regs.value[in.src], in.cmp_rhs);
  }

  bool eval_b(const CBExpr* b, const Regs& regs) const {
    switch (b->kind) {
    case BExprKind::True:
      return true;
    case BExprKind::False:
      return false;
    case BExprKind::Cmp:
      return eval_cmp(b->op, eval(b->a, regs), eval(b->b, regs));
    case BExprKind::Not:
      return !eval_b(b->x, regs);
    case BExprKind::And:
      return eval_b(b->x, regs) && eval_b(b->y, regs);
    case BExprKind::Or:
      return eval_b(b->x, regs) || eval_b(b->y, regs);
    case BExprKind::IsInt:
      return eval(b->a, regs).is_integer();
    }
    throw std::logic_error("unreachable");
  }

  State read_state(const Regs& regs) const {
    State s;
    for (size_t i = 0; i < names_.size(); ++i)
      if (regs.defined[i]) s[names_[i]] = regs.value[i];
    return s;
  }

private:
  int slot_of(const std::string& name) {
    auto it = slots_.find(name);
    if (it != slots_.end()) return it->second;
    int s = static_cast<int>(names_.size());
    names_.push_back(name);
    slots_[name] = s;
    return s;
  }

  const CExpr* compile_expr(const ExprPtr& e) {
    CExpr c;
    c.kind = e->kind;
    switch (e->kind) {
    case ExprKind::Literal:
      c.literal = e->literal;
      break;
    case ExprKind::Variable:
      c.slot = slot_of(e->name);
      break;
    case ExprKind::Ite:
      c.c = compile_bexpr(e->cond);
      c.a = compile_expr(e->lhs);
      c.b = compile_expr(e->rhs);
      break;
    case ExprKind::Iverson:
      c.c = compile_bexpr(e->cond);
      break;
    default:
      c.a = compile_expr(e->lhs);
      if (e->rhs) c.b = compile_expr(e->rhs);
      break;
    }
    exprs_.push_back(std::move(c));
    return &exprs_.back();
  }

  const CBExpr* compile_bexpr(const BExprPtr& b) {
    CBExpr c;
    c.kind = b->kind;
    switch (b->kind) {
    case BExprKind::True:
    case BExprKind::False:
      break;
    case BExprKind::Cmp:
      c.op = b->op;
      c.a = compile_expr(b->lhs);
      c.b = compile_expr(b->rhs);
      break;
    case BExprKind::Not:
      c.x = compile_bexpr(b->blhs);
      break;
    case BExprKind::And:
    case BExprKind::Or:
      c.x = compile_bexpr(b->blhs);
      c.y = compile_bexpr(b->brhs);
      break;
    case BExprKind::IsInt:
      c.a = compile_expr(b->lhs);
      break;
    }
    bexprs_.push_back(std::move(c));
    return &bexprs_.back();
  }

  int compile_stmt(const ProgramPtr& p, int next) {
    switch (p->kind) {
    case StmtKind::Skip: {
      Instr in{Instr::Op::Skip};
      in.next = next;
      return emit(in);
    }
    case StmtKind::Assign: {
      Instr in{Instr::Op::Assign};
      in.slot = slot_of(p->target);
      in.next = next;
      const Expr& e = *p->expr;
      bool incr = (e.kind == ExprKind::Add || e.kind == ExprKind::Sub) &&
                  e.lhs->kind == ExprKind::Variable &&
                  e.rhs->kind == ExprKind::Literal;
      if (incr) {
        in.op = Instr::Op::AssignIncr;
        in.src = slot_of(e.lhs->name);
        in.delta =
            e.kind == ExprKind::Add ? e.rhs->literal : -e.rhs->literal;
      } else {
        in.expr = compile_expr(p->expr);
      }
      return emit(in);
    }
    case StmtKind::Seq: {
      int second = compile_stmt(p->second, next);
      return compile_stmt(p->first, second);
    }
    case StmtKind::If: {
      Instr in{Instr::Op::If};
      set_guard(in, p->guard, Instr::Op::IfCmp);
      in.left = compile_stmt(p->first, next);
      in.right = compile_stmt(p->second, next);
      return emit(in);
    }
    case StmtKind::PChoice: {
      Instr in{Instr::Op::PChoice};
      const Expr& e = *p->expr;
      if (e.kind == ExprKind::Literal && e.literal.is_small() &&
          e.literal > Rational(0) && e.literal < Rational(1)) {
        in.op = Instr::Op::PChoiceConst;
        in.pa = static_cast<std::uint64_t>(e.literal.num_small());
        in.pb = static_cast<std::uint64_t>(e.literal.den_small());
      } else {
        in.expr = compile_expr(p->expr);
      }
      in.left = compile_stmt(p->first, next);
      in.right = compile_stmt(p->second, next);
      return emit(in);
    }
    case StmtKind::DChoice: {
      Instr in{Instr::Op::DChoice};
      in.left = compile_stmt(p->first, next);
      in.right = compile_stmt(p->second, next);
      if (sched_.policy == Scheduler::Policy::GreedyMin) {
        ExprPtr lo = detail::lookahead_expr(p->first, sched_.objective);
        ExprPtr ro = detail::lookahead_expr(p->second, sched_.objective);
        if (!specialize_greedy(in, lo, ro)) {
          in.look_left = compile_expr(lo);
          in.look_right = compile_expr(ro);
        }
      }
      return emit(in);
    }
    case StmtKind::While: {
      Instr placeholder{Instr::Op::While};
      int self = emit(placeholder);
      int body = compile_stmt(p->first, self);
      set_guard(code_[self], p->guard, Instr::Op::WhileCmp);
      code_[self].left = body;
      code_[self].next = next;
      return self;
    }
    }
    throw std::logic_error("unreachable");
  }

  /// Rewrites "eval(L) <= eval(R)" (ties to left) into a static jump or a
  /// one-variable compare when L - R is affine in at most one variable.
  bool specialize_greedy(Instr& in, const ExprPtr& lo, const ExprPtr& ro) {
    auto lf = detail::linear_form(lo), rf = detail::linear_form(ro);
    if (!lf || !rf) return false;
    detail::LinForm diff = *lf;
    for (const auto& [k, v] : rf->coeff) diff.coeff[k] = diff.coeff[k] - v;
    diff.constant = diff.constant - rf->constant;
    std::erase_if(diff.coeff,
                  [](const auto& kv) { return kv.second.is_zero(); });
    if (diff.coeff.empty()) {
      // decision does not depend on the state; keep the node (it still
      // counts as a step) but hard-wire the branch
      in.op = Instr::Op::Skip;
      in.next = diff.constant <= Rational(0) ? in.left : in.right;
      return true;
    }
    if (diff.coeff.size() != 1) return false;
    const auto& [name, a] = *diff.coeff.begin();
    // a*x + b <= 0
    in.op = Instr::Op::DChoiceCmp;
    in.src = slot_of(name);
    in.cmp_rhs = -diff.constant / a;
    in.cmp_op = a.sign() > 0 ? CmpOp::Le : CmpOp::Ge;
    return true;
  }

  void set_guard(Instr& in, const BExprPtr& guard, Instr::Op cmp_form) {
    if (guard->kind == BExprKind::Cmp &&
        guard->lhs->kind == ExprKind::Variable &&
        guard->rhs->kind == ExprKind::Literal) {
      in.op = cmp_form;
      in.src = slot_of(guard->lhs->name);
      in.cmp_op = guard->op;
      in.cmp_rhs = guard->rhs->literal;
    } else {
      in.guard = compile_bexpr(guard);
    }
  }

  int emit(Instr in) {
    code_.push_back(std::move(in));
    return static_cast<int>(code_.size() - 1);
  }

  Scheduler sched_;
  std::vector<std::string> names_;
  std::map<std::string, int> slots_;
  std::deque<CExpr> exprs_;
  std::deque<CBExpr> bexprs_;
  std::vector<Instr> code_;
  int entry_ = -1;
};

} // namespace machine

// ---------------------------------------------------------------------------
// Trials and aggregation

struct TrialOutcome {
  enum class Kind { Terminated, Censored, Errored };
  Kind kind;
  State final_state; // Terminated only
  long long steps = 0;
  std::string error;
};

inline std::uint64_t trial_seed(std::uint64_t master_seed,
                                std::uint64_t trial_index) {
  return RngStream::mix(RngStream::mix(master_seed) ^
                        (trial_index + 0x632BE59BD9B4E019ull));
}

inline TrialOutcome run_trial(const machine::Compiled& m, const State& init,
                              long long max_steps, std::uint64_t seed) {
  RngStream rng(seed);
  machine::Regs regs = m.make_regs(init);
  std::uint64_t flip = 0;
  int pc = m.entry();
  long long steps = 0;
  try {
    while (pc != -1) {
      if (steps >= max_steps) return {TrialOutcome::Kind::Censored, {}, steps};
      pc = m.step(pc, regs, rng, flip);
      ++steps;
    }
  } catch (const EvalError& e) {
    return {TrialOutcome::Kind::Errored, {}, steps, e.what()};
  }
  return {TrialOutcome::Kind::Terminated, m.read_state(regs), steps};
}

inline TrialOutcome run_trial(const ProgramPtr& prog, const State& init,
                              const Scheduler& sched, long long max_steps,
                              std::uint64_t seed) {
  machine::Compiled m(prog, sched);
  return run_trial(m, init, max_steps, seed);
}

struct Interval {
  double lo = 0, hi = 0;

  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

inline Interval wilson95(long long successes, long long n) {
  if (n == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  double phat = static_cast<double>(successes) / static_cast<double>(n);
  double z2n = z * z / static_cast<double>(n);
  double denom = 1.0 + z2n;
  double center = (phat + z2n / 2.0) / denom;
  double half = z *
                std::sqrt(phat * (1.0 - phat) / static_cast<double>(n) +
                          z2n / (4.0 * static_cast<double>(n))) /
                denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct SimSummary {
  long long trials = 0;
  long long terminated = 0;
  long long censored = 0;
  long long errored = 0;
  Rational termination_fraction;
  Interval wilson;
  Rational mean_steps_terminated;
};

inline SimSummary simulate(const ProgramPtr& prog, const State& init,
                           const Scheduler& sched, long long trials,
                           long long max_steps, std::uint64_t master_seed) {
  if (trials < 1)
    throw EvalError(EvalError::Kind::InvalidParameters, "trials must be >= 1");
  machine::Compiled m(prog, sched);
  SimSummary s;
  s.trials = trials;
  long long step_sum = 0;
  for (long long i = 0; i < trials; ++i) {
    TrialOutcome out = run_trial(m, init, max_steps,
                                 trial_seed(master_seed,
                                            static_cast<std::uint64_t>(i)));
    switch (out.kind) {
    case TrialOutcome::Kind::Terminated:
      ++s.terminated;
      step_sum += out.steps;
      break;
    case TrialOutcome::Kind::Censored:
      ++s.censored;
      break;
    case TrialOutcome::Kind::Errored:
      ++s.errored;
      break;
    }
  }
  s.termination_fraction = Rational(s.terminated) / Rational(trials);
  s.wilson = wilson95(s.terminated, trials);
  s.mean_steps_terminated =
      s.terminated ? Rational(step_sum) / Rational(s.terminated) : Rational(0);
  return s;
}

} // namespace pgcl

#endif
