#include <catch2/catch_amalgamated.hpp>

#include "pgcl/syntax.hpp"

using namespace pgcl;

namespace {
State st(std::initializer_list<std::pair<const std::string, Rational>> kv) {
  return State(kv);
}
} // namespace

TEST_CASE("expression evaluation") {
  State s = st({{"x", Rational(3)}, {"y", Rational(-2)}});
  CHECK(eval_expr(binary(ExprKind::Add, var("x"), var("y")), s) == Rational(1));
  CHECK(eval_expr(binary(ExprKind::Mul, var("x"), lit(Rational(1, 3))), s) ==
        Rational(1));
  CHECK(eval_expr(unary(ExprKind::Neg, var("y")), s) == Rational(2));
  CHECK(eval_expr(binary(ExprKind::Min, var("x"), var("y")), s) ==
        Rational(-2));
  CHECK(eval_expr(binary(ExprKind::Max, var("x"), var("y")), s) == Rational(3));
  CHECK(eval_expr(binary(ExprKind::Monus, var("y"), var("x")), s) ==
        Rational(0));
  CHECK(eval_expr(unary(ExprKind::Abs, var("y")), s) == Rational(2));
  CHECK(eval_expr(binary(ExprKind::Pow, lit(Rational(2)), var("x")), s) ==
        Rational(8));
  CHECK(eval_expr(binary(ExprKind::Mod, var("y"), lit(Rational(3))), s) ==
        Rational(1));
  CHECK(eval_expr(ite(cmp(var("x"), CmpOp::Gt, var("y")), lit(Rational(7)),
                      lit(Rational(9))),
                  s) == Rational(7));
  CHECK(eval_expr(iverson(cmp(var("x"), CmpOp::Eq, lit(Rational(3)))), s) ==
        Rational(1));
  CHECK(eval_expr(iverson(bfalse()), s) == Rational(0));
}

TEST_CASE("harmonic numbers are memoised exact sums") {
  State s;
  CHECK(eval_expr(unary(ExprKind::Harmonic, lit(Rational(0))), s) ==
        Rational(0));
  CHECK(eval_expr(unary(ExprKind::Harmonic, lit(Rational(1))), s) ==
        Rational(1));
  CHECK(eval_expr(unary(ExprKind::Harmonic, lit(Rational(4))), s) ==
        Rational(25, 12));
  CHECK(harmonic(300) - harmonic(299) == Rational(1, 300));
}

TEST_CASE("evaluation errors carry their kind") {
  State s = st({{"x", Rational(1, 2)}});
  auto kind_of = [&](const ExprPtr& e) {
    try {
      eval_expr(e, s);
    } catch (const EvalError& err) {
      return err.kind();
    }
    return EvalError::Kind::InvalidParameters;
  };
  CHECK(kind_of(var("zz")) == EvalError::Kind::UnboundVariable);
  CHECK(kind_of(binary(ExprKind::Div, lit(Rational(1)), lit(Rational(0)))) ==
        EvalError::Kind::DivisionByZero);
  CHECK(kind_of(binary(ExprKind::Pow, lit(Rational(2)), var("x"))) ==
        EvalError::Kind::NonIntegerArgument);
  CHECK(kind_of(unary(ExprKind::Harmonic, lit(Rational(-1)))) ==
        EvalError::Kind::NegativeArgument);
  CHECK(kind_of(binary(ExprKind::Mod, var("x"), lit(Rational(3)))) ==
        EvalError::Kind::NonIntegerArgument);
}

TEST_CASE("boolean evaluation") {
  State s = st({{"x", Rational(2)}, {"q", Rational(1, 2)}});
  CHECK(eval_bexpr(cmp(var("x"), CmpOp::Ge, lit(Rational(2))), s));
  CHECK(eval_bexpr(bnot(cmp(var("x"), CmpOp::Lt, lit(Rational(2)))), s));
  CHECK(eval_bexpr(band(btrue(), cmp(var("x"), CmpOp::Ne, lit(Rational(0)))),
                   s));
  CHECK(eval_bexpr(bor(bfalse(), btrue()), s));
  CHECK(eval_bexpr(is_int(var("x")), s));
  CHECK(!eval_bexpr(is_int(var("q")), s));
}

TEST_CASE("substitution replaces free occurrences") {
  ExprPtr e = binary(ExprKind::Add, var("x"),
                     binary(ExprKind::Mul, var("x"), var("y")));
  ExprPtr r = substitute(e, "x", lit(Rational(2)));
  CHECK(eval_expr(r, st({{"y", Rational(5)}})) == Rational(12));
  // untouched variables are preserved
  CHECK(free_vars(r) == std::set<std::string>{"y"});
  BExprPtr b = cmp(var("x"), CmpOp::Le, var("z"));
  CHECK(eval_bexpr(substitute(b, "x", lit(Rational(1))),
                   st({{"z", Rational(1)}})));
}

TEST_CASE("free variables and loop detection") {
  ProgramPtr p = seq(assign("x", lit(Rational(1))),
                     whileloop(cmp(var("x"), CmpOp::Gt, lit(Rational(0))),
                               assign("x", binary(ExprKind::Sub, var("x"),
                                                  var("d")))));
  CHECK(free_vars(p) == std::set<std::string>{"x", "d"});
  CHECK(has_loop(p));
  CHECK(!has_loop(assign("x", var("y"))));
}

TEST_CASE("structural equality distinguishes shapes") {
  ExprPtr a = binary(ExprKind::Add, var("x"), lit(Rational(1)));
  ExprPtr b = binary(ExprKind::Add, var("x"), lit(Rational(1)));
  ExprPtr c = binary(ExprKind::Add, lit(Rational(1)), var("x"));
  CHECK(struct_eq(a, b));
  CHECK(!struct_eq(a, c));
  CHECK(struct_eq(lit(Rational(1, 2)), lit(Rational(2, 4))));
  ProgramPtr p1 = pchoice(skip(), lit(Rational(1, 2)), assign("x", var("y")));
  ProgramPtr p2 = pchoice(skip(), lit(Rational(1, 2)), assign("x", var("y")));
  CHECK(struct_eq(p1, p2));
  CHECK(!struct_eq(p1, dchoice(skip(), assign("x", var("y")))));
}
