#pragma once

// Exact segment/ray geometry in Q^n and polyline paths with rational
// parameters. Every squared distance here is rational: closest points of
// segments with rational endpoints have rational parameters.

#include "semigraph/rational.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace semigraph {

/// Squared distance from p to a + t (b - a), t in [0, 1] (or [0, inf) for rays).
inline Rational seg_point_dist2(const Point& a, const Point& b, const Point& p, bool ray = false) {
  Point ab = sub(b, a);
  Rational len2 = dot(ab, ab);
  if (len2 == 0) return dist2(a, p);
  Rational t = dot(sub(p, a), ab) / len2;
  if (t < 0) t = 0;
  if (!ray && t > 1) t = 1;
  return dist2(lerp(a, b, t), p);
}

/// Squared distance between a + s (b - a) and c + t (d - c); s, t in [0, 1]
/// unless the corresponding ray flag lifts the upper bound.
inline Rational seg_seg_dist2(const Point& a, const Point& b, const Point& c, const Point& d,
                              bool ray1 = false, bool ray2 = false) {
  Point u = sub(b, a), v = sub(d, c), w = sub(a, c);
  Rational uu = dot(u, u), vv = dot(v, v), uv = dot(u, v), uw = dot(u, w), vw = dot(v, w);
  Rational best = -1;
  auto consider = [&](const Rational& x) {
    if (best < 0 || x < best) best = x;
  };
  Rational det = uu * vv - uv * uv;
  if (det > 0) {
    // Unconstrained minimum of |w + s u - t v|^2.
    Rational s = (uv * vw - vv * uw) / det;
    Rational t = (uu * vw - uv * uw) / det;
    bool s_ok = s >= 0 && (ray1 || s <= 1);
    bool t_ok = t >= 0 && (ray2 || t <= 1);
    if (s_ok && t_ok) consider(dist2(add(a, scale(u, s)), add(c, scale(v, t))));
  }
  consider(seg_point_dist2(c, d, a, ray2));
  if (!ray1) consider(seg_point_dist2(c, d, b, ray2));
  consider(seg_point_dist2(a, b, c, ray1));
  if (!ray2) consider(seg_point_dist2(a, b, d, ray1));
  return best;
}

/// True when a, b, c are collinear and the segments a->b and b->c fold back on
/// each other (overlap beyond the shared vertex b).
inline bool folds_back(const Point& a, const Point& b, const Point& c) {
  Point u = sub(a, b), v = sub(c, b);
  Rational uv = dot(u, v);
  return uv > 0 && uv * uv == dot(u, u) * dot(v, v);
}

/// A polyline path t -> point for t in [0, n] with vertex k at t = k and linear
/// interpolation between vertices.
class PolylinePath {
public:
  PolylinePath() = default;
  explicit PolylinePath(std::vector<Point> vertices) : v_(std::move(vertices)) {
    if (v_.size() < 2) throw std::invalid_argument("PolylinePath: need at least two vertices");
  }

  const std::vector<Point>& vertices() const { return v_; }
  std::size_t segments() const { return v_.size() - 1; }
  Rational max_param() const { return Rational(static_cast<long>(segments())); }
  std::size_t dim() const { return v_.front().size(); }

  Point eval(const Rational& t) const {
    if (t <= 0) return v_.front();
    if (t >= max_param()) return v_.back();
    Natural fl = t.get_num() / t.get_den();
    std::size_t k = fl.get_ui();
    Rational frac = t - Rational(fl);
    if (frac == 0) return v_[k];
    return lerp(v_[k], v_[k + 1], frac);
  }

  /// Points determining the image of [t0, t1]: the two ends and every vertex
  /// strictly between. Their convex hull contains the image.
  std::vector<Point> sub_points(const Rational& t0, const Rational& t1) const {
    std::vector<Point> pts;
    pts.push_back(eval(t0));
    Natural k0 = t0.get_num() / t0.get_den();
    if (Rational(k0) <= t0) k0 += 1;
    for (Natural k = k0; Rational(k) < t1; k += 1) pts.push_back(v_[k.get_ui()]);
    pts.push_back(eval(t1));
    return pts;
  }

  /// Squared diameter of the image of [t0, t1], exactly.
  Rational diam2(const Rational& t0, const Rational& t1) const {
    auto pts = sub_points(t0, t1);
    Rational best = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) best = rmax(best, dist2(pts[i], pts[j]));
    return best;
  }

  /// Squared distance from p to the image of [t0, t1].
  Rational dist2_to(const Point& p, const Rational& t0, const Rational& t1) const {
    auto pts = sub_points(t0, t1);
    Rational best = dist2(p, pts[0]);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) best = rmin(best, seg_point_dist2(pts[i], pts[i + 1], p));
    return best;
  }

  /// Rational upper bound on the arc length of [t0, t1].
  Rational length_upper(const Rational& t0, const Rational& t1) const {
    auto pts = sub_points(t0, t1);
    Rational s = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += sqrt_upper(dist2(pts[i], pts[i + 1]), 30);
    return s;
  }

  /// Points along [t0, t1] so that every point of the image is within `spacing`
  /// of one of them (strictly), including both ends and all vertices.
  std::vector<Point> sample(const Rational& t0, const Rational& t1, const Rational& spacing) const {
    auto pts = sub_points(t0, t1);
    std::vector<Point> out;
    out.push_back(pts[0]);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      Rational len = sqrt_upper(dist2(pts[i], pts[i + 1]), 30);
      // n pieces of length len / n < 2 * spacing; the midpoint rule gives < spacing.
      Rational q = len / (2 * spacing);
      Natural n = q.get_num() / q.get_den() + 1;
      unsigned long cnt = n.get_ui();
      for (unsigned long m = 1; m <= cnt; ++m) out.push_back(lerp(pts[i], pts[i + 1], Rational(static_cast<long>(m), static_cast<long>(cnt))));
    }
    return out;
  }

private:
  std::vector<Point> v_;
};

/// Hash-grid over double images of rational points. Used only to prune
/// candidate pairs; every decision is still made in exact arithmetic.
class GridIndex {
public:
  GridIndex() = default;
  explicit GridIndex(double cell) : cell_(cell > 0 ? cell : 1.0) {}

  double cell() const { return cell_; }

  void insert(const std::vector<double>& p, std::uint32_t id) { buckets_[key(cell_of(p))].push_back(id); }

  /// Ids in all cells within `reach` cells of p (Chebyshev distance in cells).
  template <class F>
  void visit(const std::vector<double>& p, int reach, F&& f) const {
    auto c = cell_of(p);
    std::vector<std::int64_t> cur(c.size());
    visit_rec(c, cur, 0, reach, f);
  }

  std::vector<std::int64_t> cell_of(const std::vector<double>& p) const {
    std::vector<std::int64_t> c(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) c[i] = static_cast<std::int64_t>(std::floor(p[i] / cell_));
    return c;
  }

private:
  template <class F>
  void visit_rec(const std::vector<std::int64_t>& c, std::vector<std::int64_t>& cur, std::size_t i, int reach,
                 F& f) const {
    if (i == c.size()) {
      auto it = buckets_.find(key(cur));
      if (it != buckets_.end())
        for (auto id : it->second) f(id);
      return;
    }
    for (int d = -reach; d <= reach; ++d) {
      cur[i] = c[i] + d;
      visit_rec(c, cur, i + 1, reach, f);
    }
  }

  static std::uint64_t key(const std::vector<std::int64_t>& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 1099511628211ull;
    }
    return h;
  }

  double cell_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

inline std::vector<double> to_doubles(const Point& p) {
  std::vector<double> d(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) d[i] = p[i].get_d();
  return d;
}

/// Hash grids at cell sizes h, 2h, 4h, ... over double images of points.
/// lower_dist(p) is a lower estimate of the distance from p to the set: the
/// largest cell size whose 3^n block around p is empty. Used only to size
/// candidates; callers verify their choices exactly.
class MultiGrid {
public:
  MultiGrid(double base, int levels) {
    for (int k = 0; k < levels; ++k) grids_.emplace_back(std::ldexp(base, k));
  }

  void insert(const std::vector<double>& p) {
    for (std::uint32_t k = 0; k < grids_.size(); ++k) grids_[k].insert(p, k);
    ++count_;
  }

  double lower_dist(const std::vector<double>& p) const {
    if (count_ == 0) return std::numeric_limits<double>::infinity();
    double best = 0;
    for (const auto& g : grids_) {
      bool any = false;
      g.visit(p, 1, [&](std::uint32_t) { any = true; });
      if (any) break;
      best = g.cell();
    }
    return best;
  }

private:
  std::vector<GridIndex> grids_;
  std::size_t count_ = 0;
};

}  // namespace semigraph
