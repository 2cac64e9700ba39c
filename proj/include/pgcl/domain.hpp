#ifndef PGCL_DOMAIN_HPP
#define PGCL_DOMAIN_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pgcl/syntax.hpp"

namespace pgcl {

/// One variable ranging over the arithmetic progression lo, lo+step, ..., hi.
struct DomainVar {
  std::string name;
  Rational lo, hi;
  Rational step = Rational(1);

  std::uint64_t size() const {
    Rational span = (hi - lo) / step;
    BigInt n = span.numerator_big() / span.denominator_big() + 1;
    return n.convert_to<std::uint64_t>();
  }

  Rational value(std::uint64_t i) const {
    return lo + step * Rational(static_cast<long long>(i));
  }
};

/// Finite grid of states: the cartesian product of per-variable ranges.
struct Domain {
  std::vector<DomainVar> vars;

  std::uint64_t size() const {
    std::uint64_t n = 1;
    for (const auto& v : vars) n *= v.size();
    return n;
  }

  /// Visits every state, first variable slowest. Stops early if the callback
  /// returns false.
  void for_each_state(const std::function<bool(const State&)>& fn) const {
    State s;
    visit(0, s, fn);
  }

  std::vector<State> states() const {
    std::vector<State> out;
    out.reserve(size());
    for_each_state([&](const State& s) {
      out.push_back(s);
      return true;
    });
    return out;
  }

  bool contains(const State& s) const {
    for (const auto& v : vars) {
      auto it = s.find(v.name);
      if (it == s.end()) return false;
      const Rational& x = it->second;
      if (x < v.lo || x > v.hi) return false;
      Rational offset = (x - v.lo) / v.step;
      if (!offset.is_integer()) return false;
    }
    return true;
  }

private:
  bool visit(size_t idx, State& s,
             const std::function<bool(const State&)>& fn) const {
    if (idx == vars.size()) return fn(s);
    const DomainVar& v = vars[idx];
    std::uint64_t n = v.size();
    for (std::uint64_t i = 0; i < n; ++i) {
      s[v.name] = v.value(i);
      if (!visit(idx + 1, s, fn)) return false;
    }
    s.erase(v.name);
    return true;
  }
};

inline std::string render_state(const State& s) {
  std::string out;
  for (const auto& [k, v] : s) {
    if (!out.empty()) out += ", ";
    out += k + "=" + v.str();
  }
  return out;
}

} // namespace pgcl

#endif
