#ifndef PGCL_CHECKER_HPP
#define PGCL_CHECKER_HPP

#include <optional>
#include <string>
#include <vector>

#include "pgcl/parser.hpp"
#include "pgcl/transformer.hpp"

namespace pgcl {

enum class Verdict { Pass, Inconclusive, Fail };

inline const char* verdict_name(Verdict v) {
  switch (v) {
  case Verdict::Pass:
    return "PASS-ON-DOMAIN";
  case Verdict::Inconclusive:
    return "INCONCLUSIVE";
  case Verdict::Fail:
    return "FAIL";
  }
  return "?";
}

struct Condition {
  std::string name;
  Verdict verdict = Verdict::Pass;
  std::optional<State> witness;
  std::string detail;
};

struct Report {
  std::vector<Condition> conditions;

  Verdict overall() const {
    Verdict w = Verdict::Pass;
    for (const auto& c : conditions)
      if (static_cast<int>(c.verdict) > static_cast<int>(w)) w = c.verdict;
    return w;
  }

  std::string render() const {
    std::string out;
    for (const auto& c : conditions) {
      out += "condition " + c.name + " " + verdict_name(c.verdict);
      if (c.witness) {
        out += " state ";
        bool first = true;
        for (const auto& [k, v] : *c.witness) {
          if (!first) out += ",";
          first = false;
          out += k + "=" + v.str();
        }
      }
      if (!c.detail.empty()) out += "  # " + c.detail;
      out += "\n";
    }
    out += std::string("overall ") + verdict_name(overall()) + "\n";
    return out;
  }
};

struct LoopSpec {
  BExprPtr guard;
  ProgramPtr body;
};

/// Pulls the guard and body out of a program consisting of one while loop.
inline LoopSpec to_loop_spec(const ProgramPtr& prog) {
  if (prog->kind != StmtKind::While)
    throw EvalError(EvalError::Kind::InvalidParameters,
                    "certificate checking requires a top-level while loop");
  return LoopSpec{prog->guard, prog->first};
}

struct CheckConfig {
  Domain domain;
  std::vector<Rational> h_samples = {Rational(1), Rational(10), Rational(100),
                                     Rational(1000), Rational(10000)};
  Rational pd_step = Rational(1, 4);
  Rational pd_max = Rational(10000);
  int fuel = 64;
};

namespace detail {

/// Accumulates the worst outcome of one named condition across many states.
class Tracker {
public:
  explicit Tracker(std::string name) : cond_{std::move(name)} {}

  void fail(const State& s, std::string why = "") {
    if (cond_.verdict == Verdict::Fail) return;
    cond_.verdict = Verdict::Fail;
    cond_.witness = s;
    cond_.detail = std::move(why);
  }

  void inconclusive(const State& s, std::string why = "") {
    if (cond_.verdict != Verdict::Pass) return;
    cond_.verdict = Verdict::Inconclusive;
    cond_.witness = s;
    cond_.detail = std::move(why);
  }

  void note(std::string text) {
    if (cond_.detail.empty()) cond_.detail = std::move(text);
  }

  /// Records "lhs <= bound" where `bound` may only be a lower bound of the
  /// true right-hand side.
  void require_le(const Rational& lhs, const WpResult& rhs, const State& s) {
    if (lhs <= rhs.value) return;
    if (rhs.exact)
      fail(s, lhs.str() + " > " + rhs.value.str());
    else
      inconclusive(s, lhs.str() + " exceeds lower bound " + rhs.value.str());
  }

  Condition take() { return std::move(cond_); }

private:
  Condition cond_;
};

inline Rational eval_at_v(const ExprPtr& e, const Rational& v) {
  return eval_expr(e, State{{kVariantArg, v}});
}

} // namespace detail

/// Shape check for the progress functions: on the grid v = step, 2*step,
/// ..., max both must be antitone, p must land in (0,1] and d must be
/// strictly positive.
inline Report check_pd_shape(const ExprPtr& p, const ExprPtr& d,
                             const Rational& step, const Rational& grid_max) {
  detail::Tracker p_range("p-range"), d_positive("d-positive"),
      p_antitone("p-antitone"), d_antitone("d-antitone");
  std::optional<Rational> prev_p, prev_d;
  for (Rational v = step; v <= grid_max; v = v + step) {
    State at{{kVariantArg, v}};
    try {
      Rational pv = detail::eval_at_v(p, v);
      if (!(pv > Rational(0) && pv <= Rational(1)))
        p_range.fail(at, "p(v) = " + pv.str());
      if (prev_p && pv > *prev_p) p_antitone.fail(at, "p increased");
      prev_p = pv;
    } catch (const EvalError& e) {
      p_range.fail(at, e.what());
    }
    try {
      Rational dv = detail::eval_at_v(d, v);
      if (!(dv > Rational(0))) d_positive.fail(at, "d(v) = " + dv.str());
      if (prev_d && dv > *prev_d) d_antitone.fail(at, "d increased");
      prev_d = dv;
    } catch (const EvalError& e) {
      d_positive.fail(at, e.what());
    }
  }
  Report r;
  r.conditions = {p_range.take(), d_positive.take(), p_antitone.take(),
                  d_antitone.take()};
  return r;
}

/// Quasi-variant rule. For every domain state satisfying the guard and the
/// invariant: the invariant is preserved, the variant is positive, the loop
/// body makes progress of at least d(V) with probability at least p(V), and
/// V is a super-martingale.
inline Report check_new_rule(const LoopSpec& loop, const CertificateNew& cert,
                             const CheckConfig& cfg) {
  Report report =
      check_pd_shape(cert.prob, cert.decrease, cfg.pd_step, cfg.pd_max);

  detail::Tracker coverage("pd-grid-coverage");
  detail::Tracker invariant("invariant"), positivity("positivity"),
      progress("progress"), super("supermartingale");
  const bool body_loop_free = !has_loop(loop.body);
  if (!body_loop_free) super.note("sampled-H");

  ExprPtr iv_inv = iverson(cert.invariant);
  cfg.domain.for_each_state([&](const State& s) {
    if (!eval_bexpr(loop.guard, s) || !eval_bexpr(cert.invariant, s))
      return true;
    try {
      Rational vs = eval_expr(cert.variant, s);

      if (!(vs > Rational(0))) positivity.fail(s, "V = " + vs.str());
      if (vs > cfg.pd_max)
        coverage.inconclusive(s, "V = " + vs.str() +
                                     " exceeds the p,d grid maximum " +
                                     cfg.pd_max.str());

      invariant.require_le(Rational(1),
                           wp_eval(loop.body, iv_inv, s, cfg.fuel), s);

      if (vs > Rational(0)) {
        Rational pv = detail::eval_at_v(cert.prob, vs);
        Rational dv = detail::eval_at_v(cert.decrease, vs);
        ExprPtr dropped =
            iverson(cmp(cert.variant, CmpOp::Le, lit(vs - dv)));
        progress.require_le(pv, wp_eval(loop.body, dropped, s, cfg.fuel), s);
      }

      if (body_loop_free) {
        Rational a = awp_eval(loop.body, cert.variant, s);
        if (!(a <= vs))
          super.fail(s, "awp of V is " + a.str() + " > " + vs.str());
      } else {
        for (const Rational& h : cfg.h_samples) {
          ExprPtr clipped = binary(ExprKind::Monus, lit(h), cert.variant);
          super.require_le(monus(h, vs),
                           wp_eval(loop.body, clipped, s, cfg.fuel), s);
        }
      }
    } catch (const EvalError& e) {
      invariant.fail(s, e.what());
    }
    return true;
  });

  report.conditions.push_back(coverage.take());
  report.conditions.push_back(invariant.take());
  report.conditions.push_back(positivity.take());
  report.conditions.push_back(progress.take());
  report.conditions.push_back(super.take());
  return report;
}

/// Bounded integer-variant rule: on guard-and-invariant states the variant is
/// an integer in (low, high], the invariant is preserved, and the variant
/// strictly decreases with probability at least eps.
inline Report check_old_rule(const LoopSpec& loop, const CertificateOld& cert,
                             const CheckConfig& cfg) {
  detail::Tracker invariant("invariant"), range("range"),
      integrality("integer"), progress("progress");
  ExprPtr iv_inv = iverson(cert.invariant);
  cfg.domain.for_each_state([&](const State& s) {
    if (!eval_bexpr(loop.guard, s) || !eval_bexpr(cert.invariant, s))
      return true;
    try {
      Rational vs = eval_expr(cert.vint, s);
      if (!vs.is_integer()) integrality.fail(s, "VInt = " + vs.str());
      if (!(cert.low < vs && vs <= cert.high))
        range.fail(s, "VInt = " + vs.str());

      invariant.require_le(Rational(1),
                           wp_eval(loop.body, iv_inv, s, cfg.fuel), s);

      ExprPtr dropped = iverson(cmp(cert.vint, CmpOp::Lt, lit(vs)));
      progress.require_le(cert.eps, wp_eval(loop.body, dropped, s, cfg.fuel),
                          s);
    } catch (const EvalError& e) {
      invariant.fail(s, e.what());
    }
    return true;
  });
  Report r;
  r.conditions = {invariant.take(), range.take(), integrality.take(),
                  progress.take()};
  return r;
}

/// Non-termination witness: on guard-and-invariant states the martingale is
/// exact (demonic and angelic pre-expectations both equal its current value),
/// bounded, positive, and not constant across the invariant states seen.
inline Report check_nonterm(const LoopSpec& loop,
                            const CertificateNonTerm& cert,
                            const CheckConfig& cfg) {
  if (has_loop(loop.body))
    throw EvalError(EvalError::Kind::LoopNotAllowed,
                    "non-termination certificates require a loop-free body");

  detail::Tracker invariant("invariant"), positivity("positivity"),
      bounded("bounded-on-domain"), martingale("exact-martingale"),
      nonconst("non-constancy");

  std::optional<Rational> first_v;
  bool two_values = false;

  ExprPtr iv_inv = iverson(cert.invariant);
  cfg.domain.for_each_state([&](const State& s) {
    if (!eval_bexpr(cert.invariant, s)) return true;
    try {
      Rational vs = eval_expr(cert.martingale, s);
      if (!first_v)
        first_v = vs;
      else if (vs != *first_v)
        two_values = true;

      if (!eval_bexpr(loop.guard, s)) return true;

      if (!(vs > Rational(0))) positivity.fail(s, "V = " + vs.str());
      if (vs < Rational(0) || vs > cert.bound)
        bounded.fail(s, "V = " + vs.str() + " outside [0, " +
                            cert.bound.str() + "]");

      invariant.require_le(Rational(1),
                           wp_eval(loop.body, iv_inv, s, cfg.fuel), s);

      WpResult demonic = wp_eval(loop.body, cert.martingale, s, cfg.fuel);
      Rational angelic = awp_eval(loop.body, cert.martingale, s);
      if (!demonic.exact)
        martingale.inconclusive(s, "demonic value is only a lower bound");
      else if (demonic.value != vs || angelic != vs)
        martingale.fail(s, "wp = " + demonic.value.str() + ", awp = " +
                               angelic.str() + ", V = " + vs.str());
    } catch (const EvalError& e) {
      invariant.fail(s, e.what());
    }
    return true;
  });

  if (!two_values) nonconst.fail(State{}, "martingale constant on domain");

  Report r;
  r.conditions = {invariant.take(), positivity.take(), bounded.take(),
                  martingale.take(), nonconst.take()};
  return r;
}

inline Report check_certificate(const LoopSpec& loop, const Certificate& cert,
                                const CheckConfig& cfg) {
  if (const auto* c = std::get_if<CertificateNew>(&cert))
    return check_new_rule(loop, *c, cfg);
  if (const auto* c = std::get_if<CertificateOld>(&cert))
    return check_old_rule(loop, *c, cfg);
  return check_nonterm(loop, std::get<CertificateNonTerm>(cert), cfg);
}

/// Builds the progress pair induced by a ranking argument with minimum step
/// probability eps below rank r_star: d is the constant eps/2 and p follows
/// the rank's reciprocal above r_star.
inline std::pair<ExprPtr, ExprPtr>
derive_pd_from_ranking(const Rational& eps, const Rational& r_star) {
  if (!(eps > Rational(0)) || !(r_star >= eps))
    throw EvalError(EvalError::Kind::InvalidParameters,
                    "need r_star >= eps > 0");
  ExprPtr v = var(kVariantArg);
  ExprPtr above =
      binary(ExprKind::Div, lit(eps),
             binary(ExprKind::Sub, binary(ExprKind::Mul, lit(Rational(2)), v),
                    lit(eps)));
  ExprPtr below = lit(eps / (Rational(2) * r_star - eps));
  ExprPtr p = ite(cmp(v, CmpOp::Ge, lit(r_star)), above, below);
  ExprPtr d = lit(eps / Rational(2));
  return {p, d};
}

} // namespace pgcl

#endif
