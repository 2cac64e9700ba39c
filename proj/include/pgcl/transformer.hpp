#ifndef PGCL_TRANSFORMER_HPP
#define PGCL_TRANSFORMER_HPP

#include <functional>
#include <map>
#include <set>
#include <vector>

#include "pgcl/domain.hpp"
#include "pgcl/syntax.hpp"

namespace pgcl {

/// Result of evaluating a weakest pre-expectation at one state. When `exact`
/// is false the value is a sound lower bound (loop iteration ran out of fuel
/// somewhere in the computation).
struct WpResult {
  Rational value;
  bool exact = true;

  bool operator==(const WpResult& o) const {
    return exact == o.exact && value == o.value;
  }
};

/// Expectations are demand-evaluated maps from states to values.
using Expectation = std::function<WpResult(const State&)>;

inline Expectation expectation_of(const ExprPtr& f) {
  return [f](const State& s) { return WpResult{eval_expr(f, s), true}; };
}

namespace detail {

inline Rational eval_prob(const ExprPtr& p, const State& s) {
  Rational q = eval_expr(p, s);
  if (q < Rational(0) || q > Rational(1))
    throw EvalError(EvalError::Kind::ProbabilityOutOfRange,
                    "probability " + q.str() + " outside [0,1]");
  return q;
}

} // namespace detail

/// Demonic weakest pre-expectation of `prog` with respect to post-expectation
/// `f`, evaluated at `state`. Each loop is approximated from below by at most
/// `fuel` rounds of value iteration; if every contributing loop converges
/// structurally the result is flagged exact.
inline WpResult wp_eval(const ProgramPtr& prog, const Expectation& f,
                        const State& state, int fuel) {
  switch (prog->kind) {
  case StmtKind::Skip:
    return f(state);
  case StmtKind::Assign: {
    State s2 = state;
    s2[prog->target] = eval_expr(prog->expr, state);
    return f(s2);
  }
  case StmtKind::Seq: {
    const ProgramPtr second = prog->second;
    Expectation g = [&](const State& s) {
      return wp_eval(second, f, s, fuel);
    };
    return wp_eval(prog->first, g, state, fuel);
  }
  case StmtKind::If:
    return eval_bexpr(prog->guard, state)
               ? wp_eval(prog->first, f, state, fuel)
               : wp_eval(prog->second, f, state, fuel);
  case StmtKind::PChoice: {
    Rational p = detail::eval_prob(prog->expr, state);
    if (p.is_one()) return wp_eval(prog->first, f, state, fuel);
    if (p.is_zero()) return wp_eval(prog->second, f, state, fuel);
    WpResult a = wp_eval(prog->first, f, state, fuel);
    WpResult b = wp_eval(prog->second, f, state, fuel);
    return WpResult{p * a.value + (Rational(1) - p) * b.value,
                    a.exact && b.exact};
  }
  case StmtKind::DChoice: {
    WpResult a = wp_eval(prog->first, f, state, fuel);
    WpResult b = wp_eval(prog->second, f, state, fuel);
    // an inexact value is a lower bound, so an exact arm at or below the
    // other arm's bound already decides the minimum
    if (a.value <= b.value) return a;
    if (b.exact) return b;
    return WpResult{b.value, false};
  }
  case StmtKind::While: {
    if (!eval_bexpr(prog->guard, state)) return f(state);
    // Fueled unrolling with memoised per-state iterates: fuel bounds the
    // number of body rounds, and terminal states always read f. States
    // reachable through the body are discovered on demand; a not-yet-seen
    // looping state contributes the lower bound 0.
    const BExprPtr guard = prog->guard;
    const ProgramPtr body = prog->first;
    std::map<State, WpResult> cur;
    std::vector<State> order = {state};
    std::set<State> seen = {state};
    const WpResult zero{Rational(0), false};
    for (int k = 0; k < fuel; ++k) {
      std::map<State, WpResult> nxt;
      for (size_t i = 0; i < order.size(); ++i) {
        State s = order[i];
        Expectation lookup = [&](const State& s2) {
          if (!eval_bexpr(guard, s2)) return f(s2);
          auto it = cur.find(s2);
          if (it != cur.end()) return it->second;
          if (seen.insert(s2).second) order.push_back(s2);
          return zero;
        };
        WpResult r = wp_eval(body, lookup, s, fuel);
        nxt.emplace(std::move(s), std::move(r));
      }
      bool stable = nxt == cur;
      cur = std::move(nxt);
      const WpResult& at = cur.at(state);
      if (at.exact) return at;
      if (stable) break;
    }
    if (fuel == 0) return zero;
    return WpResult{cur.at(state).value, false};
  }
  }
  throw std::logic_error("unreachable");
}

inline WpResult wp_eval(const ProgramPtr& prog, const ExprPtr& f,
                        const State& state, int fuel) {
  return wp_eval(prog, expectation_of(f), state, fuel);
}

/// Angelic weakest pre-expectation: nondeterministic choice resolves to the
/// maximum. Defined for loop-free programs only.
inline Rational awp_eval(const ProgramPtr& prog,
                         const std::function<Rational(const State&)>& f,
                         const State& state) {
  switch (prog->kind) {
  case StmtKind::Skip:
    return f(state);
  case StmtKind::Assign: {
    State s2 = state;
    s2[prog->target] = eval_expr(prog->expr, state);
    return f(s2);
  }
  case StmtKind::Seq: {
    const ProgramPtr second = prog->second;
    return awp_eval(
        prog->first,
        [&](const State& s) { return awp_eval(second, f, s); }, state);
  }
  case StmtKind::If:
    return eval_bexpr(prog->guard, state) ? awp_eval(prog->first, f, state)
                                          : awp_eval(prog->second, f, state);
  case StmtKind::PChoice: {
    Rational p = detail::eval_prob(prog->expr, state);
    if (p.is_one()) return awp_eval(prog->first, f, state);
    if (p.is_zero()) return awp_eval(prog->second, f, state);
    return p * awp_eval(prog->first, f, state) +
           (Rational(1) - p) * awp_eval(prog->second, f, state);
  }
  case StmtKind::DChoice:
    return max(awp_eval(prog->first, f, state),
               awp_eval(prog->second, f, state));
  case StmtKind::While:
    throw EvalError(EvalError::Kind::LoopNotAllowed,
                    "angelic pre-expectation requires a loop-free program");
  }
  throw std::logic_error("unreachable");
}

inline Rational awp_eval(const ProgramPtr& prog, const ExprPtr& f,
                         const State& state) {
  return awp_eval(
      prog, [&](const State& s) { return eval_expr(f, s); }, state);
}

/// Value iteration for a single loop over an explicit finite grid of states.
/// Returns the iterate values at `at` for k = 0..iters. Reads outside the
/// grid contribute 0.
inline std::vector<Rational>
loop_value_iteration(const ProgramPtr& loop, const ExprPtr& f,
                     const Domain& dom, const State& at, int iters, int fuel) {
  if (loop->kind != StmtKind::While)
    throw EvalError(EvalError::Kind::InvalidParameters,
                    "value iteration requires a while loop");
  const BExprPtr guard = loop->guard;
  const ProgramPtr body = loop->first;
  std::vector<State> states = dom.states();

  // start from [!G]*f so k counts body rounds with the terminal value in
  // place from the first round on
  std::map<State, Rational> cur;
  for (const State& s : states)
    cur[s] = eval_bexpr(guard, s) ? Rational(0) : eval_expr(f, s);
  auto read = [&](const State& s) {
    auto it = cur.find(s);
    return WpResult{it == cur.end() ? Rational(0) : it->second, true};
  };
  auto value_at = [&](const State& s) {
    auto it = cur.find(s);
    return it == cur.end() ? Rational(0) : it->second;
  };

  std::vector<Rational> trace;
  trace.push_back(value_at(at));
  for (int k = 0; k < iters; ++k) {
    std::map<State, Rational> nxt;
    for (const State& s : states) {
      if (!eval_bexpr(guard, s))
        nxt[s] = eval_expr(f, s);
      else
        nxt[s] = wp_eval(body, Expectation(read), s, fuel).value;
    }
    cur = std::move(nxt);
    trace.push_back(value_at(at));
  }
  return trace;
}

} // namespace pgcl

#endif
