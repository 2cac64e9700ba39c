#ifndef PGCL_RATIONAL_HPP
#define PGCL_RATIONAL_HPP

#include <boost/multiprecision/gmp.hpp>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <utility>

#include "pgcl/errors.hpp"

namespace pgcl {

using BigInt = boost::multiprecision::mpz_int;
using BigRat = boost::multiprecision::mpq_rational;

namespace detail {

inline __int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline BigInt bigint_from_i128(__int128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : v;
  BigInt r = static_cast<std::uint64_t>(u >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(u);
  return neg ? BigInt(-r) : r;
}

constexpr long long kI64Max = std::numeric_limits<long long>::max();
constexpr long long kI64Min = std::numeric_limits<long long>::min();

inline bool fits_i64(__int128 v) { return v >= kI64Min && v <= kI64Max; }

} // namespace detail

/// Exact rational number, always in lowest terms with positive denominator.
///
/// Values whose reduced numerator and denominator fit in 64 bits are held
/// inline and never touch the heap; anything larger is promoted to a
/// GMP-backed representation transparently. The simulator's hot loop stays
/// entirely on the inline path.
class Rational {
public:
  Rational() = default;
  Rational(long long n) : n_(n) {} // NOLINT(google-explicit-constructor)
  Rational(int n) : n_(n) {}       // NOLINT(google-explicit-constructor)

  Rational(long long n, long long d) {
    if (d == 0)
      throw EvalError(EvalError::Kind::DivisionByZero,
                      "rational with zero denominator");
    assign_i128(n, d);
  }

  explicit Rational(const BigRat& q) { assign_big(q); }

  Rational(const Rational& o) : n_(o.n_), d_(o.d_) {
    if (o.big_) big_ = std::make_unique<BigRat>(*o.big_);
  }
  Rational(Rational&&) noexcept = default;
  Rational& operator=(const Rational& o) {
    if (this != &o) {
      n_ = o.n_;
      d_ = o.d_;
      big_ = o.big_ ? std::make_unique<BigRat>(*o.big_) : nullptr;
    }
    return *this;
  }
  Rational& operator=(Rational&&) noexcept = default;

  bool is_small() const { return !big_; }

  /// Parses "a", "-a", "a/b". Throws EvalError on malformed input or zero
  /// denominator; arbitrary-precision digits accepted.
  static Rational parse(const std::string& text) {
    auto slash = text.find('/');
    try {
      if (slash == std::string::npos) return Rational(BigRat(BigInt(text)));
      BigInt num(text.substr(0, slash));
      BigInt den(text.substr(slash + 1));
      if (den == 0)
        throw EvalError(EvalError::Kind::DivisionByZero,
                        "rational literal with zero denominator");
      return Rational(BigRat(num, den));
    } catch (const std::runtime_error& e) {
      throw EvalError(EvalError::Kind::InvalidParameters,
                      "malformed rational '" + text + "'");
    }
  }

  int sign() const {
    if (big_) return big_->sign();
    return n_ > 0 ? 1 : n_ < 0 ? -1 : 0;
  }

  bool is_zero() const { return sign() == 0; }
  bool is_one() const { return is_small() ? (n_ == 1 && d_ == 1) : *big_ == 1; }

  bool is_integer() const {
    return is_small() ? d_ == 1 : denominator_big() == 1;
  }

  BigInt numerator_big() const {
    return big_ ? numerator(*big_) : BigInt(n_);
  }
  BigInt denominator_big() const {
    return big_ ? denominator(*big_) : BigInt(d_);
  }

  BigRat to_big() const { return big_ ? *big_ : BigRat(n_, d_); }

  /// Small-path accessors; only meaningful when is_small().
  long long num_small() const { return n_; }
  long long den_small() const { return d_; }

  double to_double() const {
    if (big_) return big_->convert_to<double>();
    return static_cast<double>(n_) / static_cast<double>(d_);
  }

  /// Truncates toward negative infinity; requires an integer value.
  BigInt to_integer() const {
    if (!is_integer())
      throw EvalError(EvalError::Kind::NonIntegerArgument,
                      "expected integer, got " + str());
    return numerator_big();
  }

  std::string str() const {
    if (big_) {
      if (denominator(*big_) == 1) return numerator(*big_).str();
      return numerator(*big_).str() + "/" + denominator(*big_).str();
    }
    if (d_ == 1) return std::to_string(n_);
    return std::to_string(n_) + "/" + std::to_string(d_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    if (a.is_small() && b.is_small()) {
      if (a.d_ == 1 && b.d_ == 1) {
        long long s;
        if (!__builtin_add_overflow(a.n_, b.n_, &s)) return Rational(s);
      }
      Rational r;
      r.assign_i128(i128(a.n_) * b.d_ + i128(b.n_) * a.d_, i128(a.d_) * b.d_);
      return r;
    }
    return Rational(a.to_big() + b.to_big());
  }

  friend Rational operator-(const Rational& a, const Rational& b) {
    if (a.is_small() && b.is_small()) {
      if (a.d_ == 1 && b.d_ == 1) {
        long long s;
        if (!__builtin_sub_overflow(a.n_, b.n_, &s)) return Rational(s);
      }
      Rational r;
      r.assign_i128(i128(a.n_) * b.d_ - i128(b.n_) * a.d_, i128(a.d_) * b.d_);
      return r;
    }
    return Rational(a.to_big() - b.to_big());
  }

  friend Rational operator*(const Rational& a, const Rational& b) {
    if (a.is_small() && b.is_small()) {
      Rational r;
      r.assign_i128(i128(a.n_) * b.n_, i128(a.d_) * b.d_);
      return r;
    }
    return Rational(a.to_big() * b.to_big());
  }

  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero())
      throw EvalError(EvalError::Kind::DivisionByZero, "division by zero");
    if (a.is_small() && b.is_small()) {
      Rational r;
      r.assign_i128(i128(a.n_) * b.d_, i128(a.d_) * b.n_);
      return r;
    }
    return Rational(a.to_big() / b.to_big());
  }

  friend Rational operator-(const Rational& a) {
    if (a.is_small()) {
      if (a.n_ != detail::kI64Min) {
        Rational r;
        r.n_ = -a.n_;
        r.d_ = a.d_;
        return r;
      }
    }
    return Rational(-a.to_big());
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  /// Three-way compare: negative, zero, positive.
  static int cmp(const Rational& a, const Rational& b) {
    if (a.is_small() && b.is_small()) {
      if (a.d_ == b.d_) return a.n_ < b.n_ ? -1 : a.n_ > b.n_ ? 1 : 0;
      i128 l = i128(a.n_) * b.d_, r = i128(b.n_) * a.d_;
      return l < r ? -1 : l > r ? 1 : 0;
    }
    BigRat l = a.to_big(), r = b.to_big();
    return l < r ? -1 : l > r ? 1 : 0;
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    if (a.is_small() && b.is_small()) return a.n_ == b.n_ && a.d_ == b.d_;
    return cmp(a, b) == 0;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return cmp(a, b) < 0;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return cmp(a, b) <= 0;
  }
  friend bool operator>(const Rational& a, const Rational& b) {
    return cmp(a, b) > 0;
  }
  friend bool operator>=(const Rational& a, const Rational& b) {
    return cmp(a, b) >= 0;
  }

private:
  using i128 = __int128;

  void assign_i128(i128 num, i128 den) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    i128 g = detail::gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (detail::fits_i64(num) && detail::fits_i64(den)) {
      n_ = static_cast<long long>(num);
      d_ = static_cast<long long>(den);
      big_.reset();
    } else {
      big_ = std::make_unique<BigRat>(detail::bigint_from_i128(num),
                                      detail::bigint_from_i128(den));
    }
  }

  void assign_big(const BigRat& q) {
    const BigInt& num = numerator(q);
    const BigInt& den = denominator(q);
    if (mpz_fits_slong_p(num.backend().data()) &&
        mpz_fits_slong_p(den.backend().data())) {
      n_ = num.convert_to<long long>();
      d_ = den.convert_to<long long>();
      big_.reset();
    } else {
      big_ = std::make_unique<BigRat>(q);
    }
  }

  long long n_ = 0;
  long long d_ = 1;
  std::unique_ptr<BigRat> big_;
};

/// Truncated subtraction max(a - b, 0).
inline Rational monus(const Rational& a, const Rational& b) {
  if (a <= b) return Rational(0);
  return a - b;
}

inline Rational abs(const Rational& a) { return a.sign() < 0 ? -a : a; }

inline Rational min(const Rational& a, const Rational& b) {
  return a <= b ? a : b;
}
inline Rational max(const Rational& a, const Rational& b) {
  return a >= b ? a : b;
}

/// base^exp for integer exp (negative allowed; base must be nonzero then).
inline Rational pow(const Rational& base, const BigInt& exp) {
  bool invert = exp < 0;
  if (invert && base.is_zero())
    throw EvalError(EvalError::Kind::DivisionByZero,
                    "zero raised to a negative power");
  BigInt e = invert ? BigInt(-exp) : exp;
  Rational acc(1), sq = base;
  while (e > 0) {
    if (bit_test(e, 0)) acc *= sq;
    e >>= 1;
    if (e > 0) sq *= sq;
  }
  return invert ? Rational(1) / acc : acc;
}

/// Floored modulus on integers: result in [0, |m|).
inline Rational mod_floor(const Rational& a, const Rational& m) {
  BigInt x = a.to_integer();
  BigInt y = m.to_integer();
  if (y == 0)
    throw EvalError(EvalError::Kind::DivisionByZero, "mod by zero");
  BigInt r = x % y;
  if (r < 0) r += boost::multiprecision::abs(y);
  return Rational(BigRat(r));
}

} // namespace pgcl

#endif
