#pragma once

// Fixed computable enumerations underlying every index in the library.
//
// The layout is documented bit-exactly in docs/encoding.md; changing anything
// here changes every stored code and every frozen test vector.
//
//   pair(a, b)      = (a + b)(a + b + 1)/2 + b            (Cantor)
//   tuple_L(s)      = s_0                                  if L = 1
//                   = pair(tuple(left), tuple(right))      left = first ceil(L/2)
//   encode_seq(s)   = 2^(L-1) * (2 * tuple_L(s) + 1) - 1
//   zigzag(a)       = a/2 for even a, -(a+1)/2 for odd a
//   rational(i)     = zigzag(a) / (b + 1)                  (a, b) = unpair(i)
//   alpha(i, n)     = (rational(t_0), ..., rational(t_{n-1}))  t = untuple_n(i)
//   qpos(i)         = (a + 1) / (b + 1)                    (a, b) = unpair(i)
//   tau(i)          = unpair(i)

#include "semigraph/rational.hpp"

#include <algorithm>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace semigraph::encoding {

inline Natural pair(const Natural& a, const Natural& b) {
  Natural s = a + b;
  return s * (s + 1) / 2 + b;
}

inline std::pair<Natural, Natural> unpair(const Natural& z) {
  // w = floor((sqrt(8z + 1) - 1) / 2)
  Natural disc = 8 * z + 1;
  Natural root;
  mpz_sqrt(root.get_mpz_t(), disc.get_mpz_t());
  Natural w = (root - 1) / 2;
  Natural t = w * (w + 1) / 2;
  Natural b = z - t;
  Natural a = w - b;
  return {a, b};
}

inline Natural tuple_encode(std::span<const Natural> s) {
  if (s.size() == 1) return s[0];
  std::size_t left = (s.size() + 1) / 2;
  return pair(tuple_encode(s.first(left)), tuple_encode(s.subspan(left)));
}

inline void tuple_decode_into(const Natural& z, std::size_t len, std::vector<Natural>& out) {
  if (len == 1) {
    out.push_back(z);
    return;
  }
  std::size_t left = (len + 1) / 2;
  auto [a, b] = unpair(z);
  tuple_decode_into(a, left, out);
  tuple_decode_into(b, len - left, out);
}

inline std::vector<Natural> tuple_decode(const Natural& z, std::size_t len) {
  std::vector<Natural> out;
  out.reserve(len);
  tuple_decode_into(z, len, out);
  return out;
}

/// Code of a nonempty finite sequence. Throws std::invalid_argument on empty input.
inline Natural encode_seq(std::span<const Natural> s) {
  if (s.empty()) throw std::invalid_argument("encode_seq: empty sequence");
  Natural t = tuple_encode(s);
  Natural j = 2 * t + 1;
  mpz_mul_2exp(j.get_mpz_t(), j.get_mpz_t(), s.size() - 1);
  return j - 1;
}

inline Natural encode_seq(std::initializer_list<unsigned long> s) {
  std::vector<Natural> v(s.begin(), s.end());
  return encode_seq(std::span<const Natural>(v));
}

/// Length of the sequence coded by j.
inline std::size_t seq_length(const Natural& j) {
  Natural m = j + 1;
  return mpz_scan1(m.get_mpz_t(), 0) + 1;
}

/// Total on N; decode_seq(0) = [0].
inline std::vector<Natural> decode_seq(const Natural& j) {
  if (j < 0) throw std::invalid_argument("decode_seq: negative code");
  Natural m = j + 1;
  std::size_t v = mpz_scan1(m.get_mpz_t(), 0);
  Natural odd;
  mpz_fdiv_q_2exp(odd.get_mpz_t(), m.get_mpz_t(), v);
  Natural t = (odd - 1) / 2;
  return tuple_decode(t, v + 1);
}

/// [j] = {(j)_0, ..., (j)_last}, sorted and duplicate-free.
inline std::vector<Natural> finite_set_of(const Natural& j) {
  auto s = decode_seq(j);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

inline Rational zigzag(const Natural& a) {
  if (mpz_even_p(a.get_mpz_t())) return Rational(a / 2);
  return Rational(-(a + 1) / 2);
}

inline Natural unzigzag(const Natural& z) { return z >= 0 ? Natural(2 * z) : Natural(-2 * z - 1); }

/// Enumeration of Q (surjective, not injective: 1/1 and 2/2 share a value).
inline Rational rational_at(const Natural& i) {
  auto [a, b] = unpair(i);
  Rational r(zigzag(a).get_num(), b + 1);
  r.canonicalize();
  return r;
}

inline Natural rational_index(const Rational& r) {
  Rational c = r;
  c.canonicalize();
  return pair(unzigzag(c.get_num()), c.get_den() - 1);
}

/// The dense sequence alpha of Q^dim.
inline Point alpha(const Natural& i, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("alpha: dimension must be >= 1");
  auto coords = tuple_decode(i, dim);
  Point p;
  p.reserve(dim);
  for (const auto& c : coords) p.push_back(rational_at(c));
  return p;
}

/// Canonical index of a rational point: alpha(alpha_index(p), p.size()) == p.
inline Natural alpha_index(const Point& p) {
  std::vector<Natural> idx;
  idx.reserve(p.size());
  for (const auto& c : p) idx.push_back(rational_index(c));
  return tuple_encode(idx);
}

/// Enumeration of the positive rationals.
inline Rational qpos(const Natural& i) {
  auto [a, b] = unpair(i);
  Rational r(a + 1, b + 1);
  r.canonicalize();
  return r;
}

inline Natural qpos_index(const Rational& r) {
  if (r <= 0) throw std::invalid_argument("qpos_index: value must be positive");
  Rational c = r;
  c.canonicalize();
  return pair(c.get_num() - 1, c.get_den() - 1);
}

inline std::pair<Natural, Natural> tau(const Natural& i) { return unpair(i); }

}  // namespace semigraph::encoding
