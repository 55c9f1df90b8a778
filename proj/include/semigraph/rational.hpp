#pragma once

// Exact rational scalars and points in Q^n, plus the few helpers every other
// header needs (parsing "p/q" strings, squared distances, dyadic powers,
// rational bounds on square roots).

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semigraph {

using Rational = mpq_class;
using Natural = mpz_class;
using Point = std::vector<Rational>;

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Parses "p/q", "p" or "-p/q". The result is canonicalized.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string& t) {
    while (!t.empty() && (t.back() == ' ' || t.back() == '\t')) t.pop_back();
    std::size_t i = 0;
    while (i < t.size() && (t[i] == ' ' || t[i] == '\t')) ++i;
    t.erase(0, i);
  };
  trim(s);
  if (s.empty()) throw ParseError("empty rational literal");
  auto slash = s.find('/');
  auto valid_int = [](const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!num.empty() && num[0] == '+') num.erase(0, 1);
  if (!valid_int(num) || !valid_int(den) || den[0] == '-' || den[0] == '+')
    throw ParseError("malformed rational literal '" + s + "'");
  Natural n(num), d(den);
  if (d == 0) throw ParseError("zero denominator in '" + s + "'");
  Rational r(n, d);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) {
  Rational c = r;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline double to_double(const Rational& r) { return r.get_d(); }

/// 2^k for any integer k.
inline Rational pow2(long k) {
  Natural p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k < 0 ? -k : k));
  if (k >= 0) return Rational(p);
  return Rational(Natural(1), p);
}

inline Rational dist2(const Point& a, const Point& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Rational d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline Rational dot(const Point& a, const Point& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Point sub(const Point& a, const Point& b) {
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Point add(const Point& a, const Point& b) {
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Point scale(const Point& a, const Rational& t) {
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * t;
  return r;
}

/// a + t (b - a)
inline Point lerp(const Point& a, const Point& b, const Rational& t) {
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + t * (b[i] - a[i]);
  return r;
}

/// Rational u with sqrt(x) <= u < sqrt(x) + 2^-bits. Requires x >= 0.
inline Rational sqrt_upper(const Rational& x, unsigned bits = 40) {
  if (x < 0) throw std::domain_error("sqrt_upper of negative value");
  // floor(sqrt(x * 4^bits)) computed on the floor of the scaled value; +1 covers
  // both truncations.
  Rational scaled = x * pow2(2 * static_cast<long>(bits));
  Natural fl = scaled.get_num() / scaled.get_den();
  Natural root;
  mpz_sqrt(root.get_mpz_t(), fl.get_mpz_t());
  Rational u(root + 1, Natural(1));
  u *= pow2(-static_cast<long>(bits));
  u.canonicalize();
  return u;
}

/// Rational l with sqrt(x) - 2^-bits < l <= sqrt(x). Requires x >= 0.
inline Rational sqrt_lower(const Rational& x, unsigned bits = 40) {
  if (x < 0) throw std::domain_error("sqrt_lower of negative value");
  Rational scaled = x * pow2(2 * static_cast<long>(bits));
  Natural fl = scaled.get_num() / scaled.get_den();
  Natural root;
  mpz_sqrt(root.get_mpz_t(), fl.get_mpz_t());
  Rational l(root, Natural(1));
  l *= pow2(-static_cast<long>(bits));
  l.canonicalize();
  return l;
}

inline Rational rmin(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }

/// Largest power of two 2^-k (k >= 0) that is <= x, for 0 < x <= 1; clamps to 1.
inline long floor_log2_inv(const Rational& x) {
  long k = 0;
  while (pow2(-k) > x) ++k;
  return k;
}

}  // namespace semigraph
