#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pgcl/rational.hpp"

using namespace pgcl;

TEST_CASE("construction reduces to lowest terms") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-2, 4) == Rational(-1, 2));
  CHECK(Rational(2, -4) == Rational(-1, 2));
  CHECK(Rational(0, 7) == Rational(0));
  CHECK(Rational(6, 3).str() == "2");
}

TEST_CASE("parse and print round-trip") {
  CHECK(Rational::parse("3/4").str() == "3/4");
  CHECK(Rational::parse("-3/4").str() == "-3/4");
  CHECK(Rational::parse("10").str() == "10");
  CHECK(Rational::parse(" 2/6 ") == Rational(1, 3));
  CHECK_THROWS_AS(Rational::parse("1/0"), EvalError);
  CHECK_THROWS_AS(Rational::parse("abc"), EvalError);
}

TEST_CASE("field arithmetic") {
  Rational a(1, 3), b(1, 6);
  CHECK(a + b == Rational(1, 2));
  CHECK(a - b == Rational(1, 6));
  CHECK(a * b == Rational(1, 18));
  CHECK(a / b == Rational(2));
  CHECK(-a == Rational(-1, 3));
  CHECK_THROWS_AS(a / Rational(0), EvalError);
}

TEST_CASE("comparisons are exact") {
  CHECK(Rational(1, 3) < Rational(34, 100));
  CHECK(Rational(1, 3) > Rational(33, 100));
  CHECK(Rational(2, 6) == Rational(1, 3));
  CHECK(Rational(-1, 2) < Rational(0));
  CHECK(Rational(1000000007, 2) >= Rational(1000000007, 2));
}

TEST_CASE("overflow promotes to arbitrary precision and stays exact") {
  Rational big(1);
  for (int i = 0; i < 100; ++i) big = big * Rational(10);
  Rational tiny = Rational(1) / big;
  CHECK(big * tiny == Rational(1));
  CHECK(tiny > Rational(0));
  CHECK(big + Rational(1) - big == Rational(1));
  CHECK(!big.is_small());
  // demotes when the value shrinks back into 64 bits
  Rational back = big / big;
  CHECK(back == Rational(1));
}

TEST_CASE("int64 boundary arithmetic") {
  long long m = 9223372036854775807LL;
  Rational top(m);
  CHECK(top + top == Rational(m) * Rational(2));
  CHECK((top * top) / top == top);
  Rational bottom(-m - 1);
  CHECK(bottom - bottom == Rational(0));
  CHECK(abs(bottom) == Rational(m) + Rational(1));
}

TEST_CASE("monus truncates at zero") {
  CHECK(monus(Rational(5), Rational(3)) == Rational(2));
  CHECK(monus(Rational(3), Rational(5)) == Rational(0));
  CHECK(monus(Rational(1, 2), Rational(1, 2)) == Rational(0));
}

TEST_CASE("min max abs") {
  CHECK(min(Rational(1, 3), Rational(1, 4)) == Rational(1, 4));
  CHECK(max(Rational(-1), Rational(-2)) == Rational(-1));
  CHECK(abs(Rational(-7, 3)) == Rational(7, 3));
}

TEST_CASE("integer powers") {
  CHECK(pow(Rational(2), BigInt(10)) == Rational(1024));
  CHECK(pow(Rational(2), BigInt(-1)) == Rational(1, 2));
  CHECK(pow(Rational(2, 3), BigInt(2)) == Rational(4, 9));
  CHECK(pow(Rational(5), BigInt(0)) == Rational(1));
  CHECK(pow(Rational(2), BigInt(60)) == Rational(1152921504606846976LL));
  CHECK_THROWS_AS(pow(Rational(0), BigInt(-1)), EvalError);
}

TEST_CASE("floored modulus") {
  CHECK(mod_floor(Rational(7), Rational(3)) == Rational(1));
  CHECK(mod_floor(Rational(-1), Rational(3)) == Rational(2));
  CHECK(mod_floor(Rational(0), Rational(3)) == Rational(0));
  CHECK(mod_floor(Rational(3), Rational(3)) == Rational(0));
  CHECK_THROWS_AS(mod_floor(Rational(1, 2), Rational(3)), EvalError);
}

TEST_CASE("predicates") {
  CHECK(Rational(4, 2).is_integer());
  CHECK(!Rational(1, 2).is_integer());
  CHECK(Rational(0).is_zero());
  CHECK(Rational(3, 3).is_one());
  CHECK(Rational(-1, 2).sign() == -1);
  CHECK(Rational(1, 2).to_double() == Catch::Approx(0.5));
}

TEST_CASE("randomized field laws with a reference big implementation") {
  std::mt19937_64 gen(7);
  auto rnd = [&]() {
    long long n = static_cast<long long>(gen() % 2000001) - 1000000;
    long long d = static_cast<long long>(gen() % 1000) + 1;
    return Rational(n, d);
  };
  for (int i = 0; i < 2000; ++i) {
    Rational a = rnd(), b = rnd(), c = rnd();
    CHECK(a + b == b + a);
    CHECK((a + b) + c == a + (b + c));
    CHECK(a * (b + c) == a * b + a * c);
    BigRat ra = a.to_big(), rb = b.to_big();
    CHECK((a * b).to_big() == ra * rb);
    CHECK((a - b).to_big() == ra - rb);
    if (!b.is_zero()) CHECK((a / b).to_big() == ra / rb);
    CHECK(Rational::cmp(a, b) == (ra < rb ? -1 : ra == rb ? 0 : 1));
  }
}
