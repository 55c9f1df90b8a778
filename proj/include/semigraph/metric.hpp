#pragma once

// Exact Euclidean geometry over Q^n: rational balls, the p + q*sqrt(r)
// comparison kernel, epsilon-closeness and Hausdorff comparisons of finite
// point sets, and computable points.

#include "semigraph/encoding.hpp"
#include "semigraph/rational.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace semigraph {

enum class Cmp { Less, Equal, Greater };

inline const char* to_string(Cmp c) {
  switch (c) {
    case Cmp::Less: return "LESS";
    case Cmp::Equal: return "EQUAL";
    case Cmp::Greater: return "GREATER";
  }
  return "?";
}

/// Open ball I with rational center and positive rational radius; the closed
/// ball with the same data is I-hat.
/// The rational data is not modified after construction: the nearest doubles
/// are cached for floating-point filters.
struct Ball {
  Point center;
  Rational radius;
  std::vector<double> center_d;
  double radius_d = 0;

  Ball() = default;
  Ball(Point c, Rational r) : center(std::move(c)), radius(std::move(r)) {
    if (radius <= 0) throw std::invalid_argument("Ball: radius must be positive");
    center_d.resize(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) center_d[i] = center[i].get_d();
    radius_d = radius.get_d();
  }

  std::size_t dim() const { return center.size(); }

  /// Index i with ball_of(i) == *this.
  Natural index() const {
    return encoding::pair(encoding::alpha_index(center), encoding::qpos_index(radius));
  }

  friend bool operator==(const Ball& a, const Ball& b) {
    return a.radius == b.radius && a.center == b.center;
  }
};

/// I_i = B(alpha(tau_1(i)), qpos(tau_2(i))).
inline Ball ball_of(const Natural& i, std::size_t dim) {
  auto [a, b] = encoding::tau(i);
  return Ball(encoding::alpha(a, dim), encoding::qpos(b));
}

/// p + q * sqrt(r), r >= 0.
struct QuadExpr {
  Rational p = 0;
  Rational q = 0;
  Rational r = 0;

  QuadExpr() = default;
  QuadExpr(Rational p_, Rational q_ = 0, Rational r_ = 0)
      : p(std::move(p_)), q(std::move(q_)), r(std::move(r_)) {
    if (r < 0) throw std::invalid_argument("QuadExpr: negative radicand");
    if (r == 0 || q == 0) {
      q = 0;
      r = 0;
    }
  }

  static QuadExpr sqrt_of(const Rational& x) { return QuadExpr(0, 1, x); }
};

namespace detail {

// sign(a + b sqrt(r))
inline int sign1(const Rational& a, const Rational& b, const Rational& r) {
  int sa = a > 0 ? 1 : (a < 0 ? -1 : 0);
  int sb = (r == 0) ? 0 : (b > 0 ? 1 : (b < 0 ? -1 : 0));
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  Rational lhs = a * a;
  Rational rhs = b * b * r;
  if (lhs > rhs) return sa;
  if (lhs < rhs) return sb;
  return 0;
}

// sign(a + b sqrt(r) + c sqrt(s))
inline int sign2(const Rational& a, const Rational& b, const Rational& r, const Rational& c,
                 const Rational& s) {
  if (s == 0 || c == 0) return sign1(a, b, r);
  if (r == 0 || b == 0) return sign1(a, c, s);
  if (r == s) return sign1(a, b + c, r);
  int sx = sign1(a, b, r);  // X = a + b sqrt(r)
  int sy = c > 0 ? 1 : -1;  // Y = c sqrt(s)
  if (sx == 0) return sy;
  if (sx == sy) return sx;
  // |X| vs |Y|: X^2 - Y^2 = (a^2 + b^2 r - c^2 s) + 2ab sqrt(r)
  int d = sign1(a * a + b * b * r - c * c * s, 2 * a * b, r);
  if (d > 0) return sx;
  if (d < 0) return sy;
  return 0;
}

}  // namespace detail

/// Exact ordering of two p + q sqrt(r) values.
inline Cmp cmp_quad(const QuadExpr& x, const QuadExpr& y) {
  int s = detail::sign2(x.p - y.p, x.q, x.r, -y.q, y.r);
  return s < 0 ? Cmp::Less : (s > 0 ? Cmp::Greater : Cmp::Equal);
}

namespace detail {

inline std::vector<double> nearest_doubles(const Point& p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i].get_d();
  return out;
}

/// Floating-point filter for d(x, y)^2 against s^2, where x and y are the
/// doubles nearest to rational points and s approximates the rational
/// threshold to within s_err. +1 if certainly less, -1 if certainly greater,
/// 0 if too close to call. The bound covers every conversion and rounding.
inline int filter_dist2(const double* x, const double* y, std::size_t n, double s, double s_err) {
  constexpr double u = 0x1p-52;
  if (!(std::fabs(s) < 1e100 && s_err < 1e100)) return 0;
  double dd = 0, err = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double diff = x[i] - y[i];
    double delta = u * (std::fabs(x[i]) + std::fabs(y[i]) + std::fabs(diff));
    dd += diff * diff;
    err += 2 * std::fabs(diff) * delta + delta * delta;
  }
  if (!(dd < 1e200)) return 0;
  err = 4 * (err + u * dd) + 1e-290;
  double lo = s - s_err, hi = s + s_err;
  if (lo > 0 && dd + err < lo * lo * (1 - 8 * u)) return 1;
  if (hi <= 0 || dd - err > hi * hi * (1 + 8 * u)) return -1;
  return 0;
}

inline bool dist2_less(const Point& a, const Point& b, const Rational& s) {
  auto x = nearest_doubles(a), y = nearest_doubles(b);
  double sd = s.get_d();
  int f = filter_dist2(x.data(), y.data(), x.size(), sd, 0x1p-51 * std::fabs(sd));
  if (f != 0) return f > 0;
  return dist2(a, b) < s * s;
}

inline bool dist2_greater(const Point& a, const Point& b, const Rational& s) {
  auto x = nearest_doubles(a), y = nearest_doubles(b);
  double sd = s.get_d();
  int f = filter_dist2(x.data(), y.data(), x.size(), sd, 0x1p-51 * std::fabs(sd));
  if (f != 0) return f < 0;
  return dist2(a, b) > s * s;
}

}  // namespace detail

/// d(a, b) < c, exactly.
inline bool dist_lt(const Point& a, const Point& b, const Rational& c) {
  return c > 0 && detail::dist2_less(a, b, c);
}

/// d(a, b) + e < c, exactly (e may be any rational).
inline bool dist_plus_lt(const Point& a, const Point& b, const Rational& e, const Rational& c) {
  Rational slack = c - e;
  return slack > 0 && detail::dist2_less(a, b, slack);
}

/// d(a, b) > c, exactly.
inline bool dist_gt(const Point& a, const Point& b, const Rational& c) {
  return c < 0 || detail::dist2_greater(a, b, c);
}

inline void require_nonempty(std::span<const Point> a, std::span<const Point> b, const char* who) {
  if (a.empty() || b.empty()) throw std::invalid_argument(std::string(who) + ": empty point set");
}

/// A ~_eps B: every point of each set has a point of the other at distance < eps.
inline bool eps_close(std::span<const Point> a, std::span<const Point> b, const Rational& eps) {
  require_nonempty(a, b, "eps_close");
  if (eps <= 0) return false;
  Rational e2 = eps * eps;
  auto directed = [&](std::span<const Point> from, std::span<const Point> to) {
    for (const auto& x : from) {
      bool found = false;
      for (const auto& y : to)
        if (dist2(x, y) < e2) {
          found = true;
          break;
        }
      if (!found) return false;
    }
    return true;
  };
  return directed(a, b) && directed(b, a);
}

/// Squared Hausdorff distance of two finite sets.
inline Rational hausdorff2(std::span<const Point> a, std::span<const Point> b) {
  require_nonempty(a, b, "hausdorff2");
  auto directed = [](std::span<const Point> from, std::span<const Point> to) {
    Rational worst = 0;
    for (const auto& x : from) {
      Rational best = dist2(x, to[0]);
      for (std::size_t k = 1; k < to.size(); ++k) {
        Rational d = dist2(x, to[k]);
        if (d < best) best = d;
      }
      if (best > worst) worst = best;
    }
    return worst;
  };
  return rmax(directed(a, b), directed(b, a));
}

/// d_H(A, B) < c, exactly.
inline bool hausdorff_lt(std::span<const Point> a, std::span<const Point> b, const Rational& c) {
  require_nonempty(a, b, "hausdorff_lt");
  return cmp_quad(QuadExpr::sqrt_of(hausdorff2(a, b)), QuadExpr(c)) == Cmp::Less;
}

/// A computable point: k -> a rational point within 2^-k of the represented
/// point. The dense-sequence index f(k) is recoverable through index().
class ComputablePoint {
public:
  using Approx = std::function<Point(unsigned)>;

  ComputablePoint() = default;
  ComputablePoint(std::size_t dim, Approx f) : dim_(dim), f_(std::move(f)) {}

  static ComputablePoint constant(Point p) {
    std::size_t d = p.size();
    return ComputablePoint(d, [p = std::move(p)](unsigned) { return p; });
  }

  std::size_t dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(f_); }

  Point approx(unsigned k) const { return f_(k); }
  Natural index(unsigned k) const { return encoding::alpha_index(f_(k)); }

private:
  std::size_t dim_ = 0;
  Approx f_;
};

/// alpha(f(k)).
inline Point point_approx(const ComputablePoint& x, unsigned k) {
  return encoding::alpha(x.index(k), x.dim());
}

}  // namespace semigraph
