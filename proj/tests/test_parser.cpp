#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pgcl/parser.hpp"

using namespace pgcl;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Random ASTs in parser normal form: literal folding means a printed
// negative or fractional constant parses back as one literal, so the
// generator never wraps literals in Neg or Div directly.
struct Gen {
  std::mt19937_64 rng;

  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int pick(int n) { return static_cast<int>(rng() % n); }

  Rational rational() {
    long long n = static_cast<long long>(rng() % 41) - 20;
    long long d = static_cast<long long>(rng() % 7) + 1;
    return Rational(n, d);
  }

  std::string name() { return std::string(1, static_cast<char>('a' + pick(6))); }

  ExprPtr expr(int depth) {
    if (depth == 0) return pick(2) ? lit(rational()) : var(name());
    switch (pick(12)) {
    case 0:
      return lit(rational());
    case 1:
      return var(name());
    case 2:
      return binary(ExprKind::Add, expr(depth - 1), expr(depth - 1));
    case 3:
      return binary(ExprKind::Sub, expr(depth - 1), expr(depth - 1));
    case 4:
      return binary(ExprKind::Mul, expr(depth - 1), expr(depth - 1));
    case 5: {
      ExprPtr a = expr(depth - 1), b = expr(depth - 1);
      if (a->kind == ExprKind::Literal && b->kind == ExprKind::Literal)
        return binary(ExprKind::Add, a, b);
      return binary(ExprKind::Div, a, b);
    }
    case 6: {
      ExprPtr a = expr(depth - 1);
      if (a->kind == ExprKind::Literal) return a;
      return unary(ExprKind::Neg, a);
    }
    case 7:
      return binary(ExprKind::Min, expr(depth - 1), expr(depth - 1));
    case 8:
      return binary(ExprKind::Monus, expr(depth - 1), expr(depth - 1));
    case 9:
      return unary(ExprKind::Harmonic, expr(depth - 1));
    case 10:
      return ite(bexpr(depth - 1), expr(depth - 1), expr(depth - 1));
    default:
      return iverson(bexpr(depth - 1));
    }
  }

  BExprPtr bexpr(int depth) {
    if (depth == 0) return pick(2) ? btrue() : bfalse();
    switch (pick(6)) {
    case 0:
      return cmp(expr(depth - 1),
                 static_cast<CmpOp>(pick(6)), expr(depth - 1));
    case 1:
      return bnot(bexpr(depth - 1));
    case 2:
      return band(bexpr(depth - 1), bexpr(depth - 1));
    case 3:
      return bor(bexpr(depth - 1), bexpr(depth - 1));
    case 4:
      return is_int(expr(depth - 1));
    default:
      return btrue();
    }
  }

  // sequences in the grammar are right-nested, so Seq heads are atoms
  ProgramPtr atom(int depth) {
    ProgramPtr p = stmt(depth);
    while (p->kind == StmtKind::Seq) p = p->first;
    return p;
  }

  ProgramPtr stmt(int depth) {
    if (depth == 0) return pick(2) ? skip() : assign(name(), expr(1));
    switch (pick(7)) {
    case 0:
      return skip();
    case 1:
      return assign(name(), expr(depth - 1));
    case 2:
      return seq(atom(depth - 1), stmt(depth - 1));
    case 3:
      return ifelse(bexpr(depth - 1), stmt(depth - 1), stmt(depth - 1));
    case 4:
      return pchoice(stmt(depth - 1), expr(depth - 1), stmt(depth - 1));
    case 5:
      return dchoice(stmt(depth - 1), stmt(depth - 1));
    default:
      return whileloop(bexpr(depth - 1), stmt(depth - 1));
    }
  }
};

} // namespace

TEST_CASE("statement grammar") {
  auto p = parse_program("x := 1; skip; { x := 2 } [1/2] { skip }");
  REQUIRE(p->kind == StmtKind::Seq);
  auto q = parse_program("while (x > 0) { { skip } [] { x := x - 1 } }");
  REQUIRE(q->kind == StmtKind::While);
  CHECK(q->first->kind == StmtKind::DChoice);
  auto r = parse_program("if (x = 0) { skip } else { y := x }");
  CHECK(r->kind == StmtKind::If);
  // trailing semicolon tolerated
  CHECK(parse_program("skip;")->kind == StmtKind::Skip);
}

TEST_CASE("expression grammar and precedence") {
  State s{{"x", Rational(5)}};
  CHECK(eval_expr(parse_expr("1 + 2 * 3"), s) == Rational(7));
  CHECK(eval_expr(parse_expr("(1 + 2) * 3"), s) == Rational(9));
  CHECK(eval_expr(parse_expr("2 - 3 - 4"), s) == Rational(-5));
  CHECK(eval_expr(parse_expr("8 / 2 / 2"), s) == Rational(2));
  CHECK(eval_expr(parse_expr("-x + 1"), s) == Rational(-4));
  CHECK(eval_expr(parse_expr("min(x, 3) + max(1, 2)"), s) == Rational(5));
  CHECK(eval_expr(parse_expr("monus(3, x)"), s) == Rational(0));
  CHECK(eval_expr(parse_expr("pow(2, 10)"), s) == Rational(1024));
  CHECK(eval_expr(parse_expr("mod(x + 1, 3)"), s) == Rational(0));
  CHECK(eval_expr(parse_expr("harmonic(4)"), s) == Rational(25, 12));
  CHECK(eval_expr(parse_expr("ite(x > 0, 1/3, 0)"), s) == Rational(1, 3));
  CHECK(eval_expr(parse_expr("iverson(x = 5)"), s) == Rational(1));
}

TEST_CASE("rational literals fold into one constant") {
  CHECK(parse_expr("1/2")->kind == ExprKind::Literal);
  CHECK(parse_expr("-3")->kind == ExprKind::Literal);
  CHECK(parse_expr("-3/4")->literal == Rational(-3, 4));
  // division by a variable stays an operation
  CHECK(parse_expr("1/x")->kind == ExprKind::Div);
}

TEST_CASE("boolean grammar disambiguates parentheses") {
  State s{{"x", Rational(1)}, {"y", Rational(2)}};
  CHECK(eval_bexpr(parse_bexpr("(x + 1) < y + 2"), s));
  CHECK(eval_bexpr(parse_bexpr("(x < y) & !(y < x)"), s));
  CHECK(eval_bexpr(parse_bexpr("x >= 1 | false"), s));
  CHECK(eval_bexpr(parse_bexpr("is_int(x) & true"), s));
  // & binds tighter than |
  CHECK(eval_bexpr(parse_bexpr("true | false & false"), s));
}

TEST_CASE("type errors are rejected at parse time") {
  // probability annotations must be arithmetic
  CHECK_THROWS_AS(parse_program("{ skip } [true] { skip }"), SyntaxError);
  CHECK_THROWS_AS(parse_program("{ skip } [x < 1] { skip }"), SyntaxError);
  // guards must be boolean
  CHECK_THROWS_AS(parse_program("while (x + 1) { skip }"), SyntaxError);
  CHECK_THROWS_AS(parse_program("if (x) { skip } else { skip }"), SyntaxError);
  CHECK_THROWS_AS(parse_program("x := true"), SyntaxError);
}

TEST_CASE("syntax errors report positions") {
  try {
    parse_program("skip;\n  x := ");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_program("x := 1 %"), SyntaxError);
  CHECK_THROWS_AS(parse_program("while (x > 0) skip"), SyntaxError);
}

TEST_CASE("every bundled fixture parses and round-trips") {
  for (const auto& entry :
       std::filesystem::directory_iterator(FIXTURE_DIR)) {
    if (entry.path().extension() != ".pgcl") continue;
    ProgramPtr p = parse_program(slurp(entry.path().filename().string()));
    CHECK(struct_eq(p, parse_program(pretty_print(p))));
  }
}

TEST_CASE("random programs round-trip through the pretty printer") {
  Gen gen(20240817);
  for (int i = 0; i < 1500; ++i) {
    ProgramPtr p = gen.stmt(1 + gen.pick(4));
    std::string text = pretty_print(p);
    INFO(text);
    ProgramPtr q = parse_program(text);
    CHECK(struct_eq(p, q));
    CHECK(pretty_print(q) == text);
  }
}

TEST_CASE("certificate parsing") {
  auto c = parse_certificate("# comment\nkind = ast-new\ninvariant = x >= 0\n"
                             "variant = x\nprob = 1/2\ndecrease = 1\n");
  CHECK(std::holds_alternative<CertificateNew>(c));

  auto o = parse_certificate("kind = ast-old\ninvariant = true\nvint = x\n"
                             "low = 0\nhigh = 2\neps = 1/2\n");
  CHECK(std::get<CertificateOld>(o).high == Rational(2));

  auto n = parse_certificate("kind = non-termination\ninvariant = true\n"
                             "martingale = x\nbound = 10\n");
  CHECK(std::get<CertificateNonTerm>(n).bound == Rational(10));

  SECTION("malformed certificates are rejected") {
    CHECK_THROWS_AS(parse_certificate("kind = bogus\n"), SyntaxError);
    CHECK_THROWS_AS(parse_certificate("kind = ast-new\ninvariant = true\n"),
                    SyntaxError); // missing fields
    CHECK_THROWS_AS(
        parse_certificate("kind = ast-new\ninvariant = true\nvariant = x\n"
                          "prob = 1/2\ndecrease = 1\nwhat = 1\n"),
        SyntaxError); // unknown key
    CHECK_THROWS_AS(
        parse_certificate("kind = ast-old\ninvariant = true\nvint = x\n"
                          "low = 0\nhigh = 2\neps = 0\n"),
        SyntaxError); // eps out of (0,1]
    CHECK_THROWS_AS(
        parse_certificate("kind = ast-old\ninvariant = true\nvint = x\n"
                          "low = 2\nhigh = 2\neps = 1/2\n"),
        SyntaxError); // low must be below high
    CHECK_THROWS_AS(
        parse_certificate("kind = non-termination\ninvariant = true\n"
                          "martingale = x\nbound = 0\n"),
        SyntaxError); // bound must be positive
    CHECK_THROWS_AS(
        parse_certificate("kind = ast-new\ninvariant = true\nvariant = x\n"
                          "prob = 1/x\ndecrease = 1\n"),
        SyntaxError); // prob may only use the reserved v
    CHECK_THROWS_AS(
        parse_certificate("kind = ast-new\ninvariant = v >= 0\nvariant = x\n"
                          "prob = 1/2\ndecrease = 1\n"),
        SyntaxError); // v is reserved
    CHECK_THROWS_AS(
        parse_certificate("kind = ast-new\nkind = ast-new\ninvariant = true\n"
                          "variant = x\nprob = 1/2\ndecrease = 1\n"),
        SyntaxError); // duplicate key
  }
}

TEST_CASE("domain parsing") {
  Domain d = parse_domain("x=0..2, n=1..2:1/2");
  CHECK(d.size() == 9);
  auto states = d.states();
  REQUIRE(states.size() == 9);
  CHECK(states.front().at("x") == Rational(0));
  CHECK(states.front().at("n") == Rational(1));
  CHECK(states.back().at("x") == Rational(2));
  CHECK(states.back().at("n") == Rational(2));
  CHECK(states[1].at("n") == Rational(3, 2)); // first variable slowest

  CHECK(d.contains(State{{"x", Rational(1)}, {"n", Rational(3, 2)}}));
  CHECK(!d.contains(State{{"x", Rational(1)}, {"n", Rational(5, 4)}}));
  CHECK(!d.contains(State{{"x", Rational(3)}, {"n", Rational(1)}}));

  CHECK(parse_domain("x=-200..200").size() == 401);
  CHECK_THROWS_AS(parse_domain("x=5..1"), SyntaxError);
  CHECK_THROWS_AS(parse_domain("x=1..5:0"), SyntaxError);
  CHECK_THROWS_AS(parse_domain(""), SyntaxError);
  CHECK_THROWS_AS(parse_domain("x"), SyntaxError);
}
