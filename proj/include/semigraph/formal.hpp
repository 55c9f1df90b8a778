#pragma once

// The formal calculus on ball codes: formal disjointness and containment at
// ball, union and family level, the formal diameter and mesh, and the
// semidecision of K <=_eps J_j for a computable compact K.
//
// Centers and radii are rational, so every relation here is decided exactly
// (not merely enumerated).

#include "semigraph/compact_set.hpp"
#include "semigraph/encoding.hpp"
#include "semigraph/fuel.hpp"
#include "semigraph/geometry.hpp"
#include "semigraph/metric.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace semigraph {

/// J_j: the finite union of the balls listed by the sequence code j.
struct UnionCode {
  std::vector<Ball> balls;

  UnionCode() = default;
  explicit UnionCode(std::vector<Ball> b) : balls(std::move(b)) {}

  bool empty() const { return balls.empty(); }
  std::size_t size() const { return balls.size(); }
  std::size_t dim() const { return balls.front().dim(); }

  Natural code() const {
    std::vector<Natural> idx;
    idx.reserve(balls.size());
    for (const auto& b : balls) idx.push_back(b.index());
    return encoding::encode_seq(idx);
  }

  static UnionCode from_code(const Natural& j, std::size_t dim) {
    UnionCode u;
    for (const auto& i : encoding::decode_seq(j)) u.balls.push_back(ball_of(i, dim));
    return u;
  }

  /// (j)_0's center, i.e. lambda_{(j)_0}.
  const Point& first_center() const { return balls.front().center; }

  Rational max_radius() const {
    Rational m = balls.front().radius;
    for (const auto& b : balls) m = rmax(m, b.radius);
    return m;
  }

  Rational min_radius() const {
    Rational m = balls.front().radius;
    for (const auto& b : balls) m = rmin(m, b.radius);
    return m;
  }

  /// x in J_j (open balls), exactly.
  bool contains(const Point& x) const {
    for (const auto& b : balls)
      if (dist_lt(x, b.center, b.radius)) return true;
    return false;
  }

  friend bool operator==(const UnionCode&, const UnionCode&) = default;
};

/// J_[l]: an ordered family of unions (the links of a formal chain).
struct FamilyCode {
  std::vector<UnionCode> links;

  FamilyCode() = default;
  explicit FamilyCode(std::vector<UnionCode> l) : links(std::move(l)) {}

  std::size_t size() const { return links.size(); }
  const UnionCode& first() const { return links.front(); }
  const UnionCode& last() const { return links.back(); }

  Natural code() const {
    std::vector<Natural> idx;
    idx.reserve(links.size());
    for (const auto& u : links) idx.push_back(u.code());
    return encoding::encode_seq(idx);
  }

  static FamilyCode from_code(const Natural& l, std::size_t dim) {
    FamilyCode f;
    for (const auto& j : encoding::decode_seq(l)) f.links.push_back(UnionCode::from_code(j, dim));
    return f;
  }

  std::size_t ball_count() const {
    std::size_t n = 0;
    for (const auto& u : links) n += u.size();
    return n;
  }

  friend bool operator==(const FamilyCode&, const FamilyCode&) = default;
};

/// Concatenation; decodes to [a] u [b].
inline UnionCode union_of(const UnionCode& a, const UnionCode& b) {
  UnionCode r = a;
  r.balls.insert(r.balls.end(), b.balls.begin(), b.balls.end());
  return r;
}

/// Hash grids over the balls of one or more unions, one grid per binary
/// radius class so that small balls are not bucketed at the scale of large
/// ones. `owner` records which union (link) each ball came from.
class BallIndex {
public:
  struct Entry {
    const Ball* ball;
    std::uint32_t owner;
  };

  BallIndex() = default;

  explicit BallIndex(std::span<const UnionCode> unions) {
    for (std::uint32_t u = 0; u < unions.size(); ++u)
      for (const auto& b : unions[u].balls) entries_.push_back({&b, u});
    build();
  }

  explicit BallIndex(const UnionCode& single) {
    for (const auto& b : single.balls) entries_.push_back({&b, 0});
    build();
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// A superset of the entries whose ball contains p.
  template <class F>
  void near(const Point& p, F&& f) const {
    if (entries_.empty()) return;
    near(to_doubles(p), 0.0, f);
  }

  /// A superset of the entries whose center is within extra + radius of p.
  template <class F>
  void near(const std::vector<double>& p, double extra, F&& f) const {
    for (const auto& lv : levels_) {
      int reach = 1 + static_cast<int>(std::ceil(extra / lv.grid.cell()));
      lv.grid.visit(p, reach, [&](std::uint32_t id) { f(entries_[id]); });
    }
  }

  double max_radius() const { return max_r_; }

  /// Some ball containing x (open), exactly.
  const Ball* containing(const Point& x) const {
    const Ball* hit = nullptr;
    near(x, [&](const Entry& e) {
      if (!hit && dist_lt(x, e.ball->center, e.ball->radius)) hit = e.ball;
    });
    return hit;
  }

private:
  struct Level {
    int exponent;
    GridIndex grid;
  };

  void build() {
    max_r_ = 0;
    std::map<int, std::vector<std::uint32_t>> classes;
    for (std::uint32_t id = 0; id < entries_.size(); ++id) {
      double r = entries_[id].ball->radius_d;
      max_r_ = std::max(max_r_, r);
      classes[std::ilogb(r) + 1].push_back(id);  // r < 2^exponent
    }
    // A ball of radius < 2^e containing p has its center within 2^e of p,
    // hence in an adjacent cell when the cell side is > 2^(e+1).
    for (auto& [e, ids] : classes) {
      Level lv{e, GridIndex(std::ldexp(2.02, e))};
      for (auto id : ids) lv.grid.insert(entries_[id].ball->center_d, id);
      levels_.push_back(std::move(lv));
    }
  }

  std::vector<Entry> entries_;
  std::vector<Level> levels_;
  double max_r_ = 0;
};

// ---------------------------------------------------------------------------
// Formal disjointness and containment

/// I_i <> I_j: d(lambda_i, lambda_j) > rho_i + rho_j.
inline bool f_disjoint_balls(const Ball& a, const Ball& b) {
  double sd = a.radius_d + b.radius_d;
  int f = detail::filter_dist2(a.center_d.data(), b.center_d.data(), a.dim(), sd, 0x1p-50 * sd);
  if (f != 0) return f < 0;
  Rational s = a.radius + b.radius;
  return dist2(a.center, b.center) > s * s;
}

inline bool f_disjoint_balls(const Natural& i, const Natural& j, std::size_t dim) {
  return f_disjoint_balls(ball_of(i, dim), ball_of(j, dim));
}

/// J_a <> J_b: all ball pairs formally disjoint.
inline bool f_disjoint_unions(const UnionCode& a, const UnionCode& b) {
  for (const auto& x : a.balls)
    for (const auto& y : b.balls)
      if (!f_disjoint_balls(x, y)) return false;
  return true;
}

/// I_i <=_forall I_j: d(lambda_i, lambda_j) + rho_i < rho_j.
inline bool f_contained_balls(const Ball& a, const Ball& b) {
  double sd = b.radius_d - a.radius_d;
  int f = detail::filter_dist2(a.center_d.data(), b.center_d.data(), a.dim(), sd,
                               0x1p-50 * (a.radius_d + b.radius_d));
  if (f != 0) return f > 0;
  return dist_plus_lt(a.center, b.center, a.radius, b.radius);
}

inline bool f_contained_balls(const Natural& i, const Natural& j, std::size_t dim) {
  return f_contained_balls(ball_of(i, dim), ball_of(j, dim));
}

/// J_i <=_forall J_j: every ball of i formally inside some ball of j.
inline bool f_contained_unions(const UnionCode& i, const UnionCode& j) {
  for (const auto& x : i.balls) {
    bool ok = false;
    for (const auto& y : j.balls)
      if (f_contained_balls(x, y)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

/// Same relation, with the target balls pre-indexed.
inline bool f_contained_unions(const UnionCode& i, const BallIndex& j) {
  for (const auto& x : i.balls) {
    bool ok = false;
    j.near(x.center, [&](const BallIndex::Entry& e) {
      if (!ok && f_contained_balls(x, *e.ball)) ok = true;
    });
    if (!ok) return false;
  }
  return true;
}

/// J_[i] <=_forall J_[j]: every union of i formally inside some union of j.
inline bool f_contained_families(const FamilyCode& i, const FamilyCode& j) {
  if (i.size() * j.size() <= 4096) {
    for (const auto& u : i.links) {
      bool ok = false;
      for (const auto& v : j.links)
        if (f_contained_unions(u, v)) {
          ok = true;
          break;
        }
      if (!ok) return false;
    }
    return true;
  }
  BallIndex idx(j.links);
  for (const auto& u : i.links) {
    // A witness union must contain u's first ball, so its owner shows up among
    // the balls near that ball's center.
    std::vector<std::uint32_t> cand;
    idx.near(u.balls.front().center, [&](const BallIndex::Entry& e) {
      if (f_contained_balls(u.balls.front(), *e.ball)) cand.push_back(e.owner);
    });
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    bool ok = false;
    for (auto c : cand)
      if (f_contained_unions(u, j.links[c])) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Formal diameter and mesh

/// fdiam(j) = sqrt(max_center_d2) + 2 max_radius, kept in exact parts.
struct FormalDiameter {
  Rational max_center_d2 = 0;
  Rational max_radius = 0;

  QuadExpr value() const { return QuadExpr(2 * max_radius, 1, max_center_d2); }
};

inline FormalDiameter fdiam(const UnionCode& j) {
  FormalDiameter f;
  f.max_radius = j.max_radius();
  std::vector<Point> centers;
  centers.reserve(j.size());
  for (const auto& b : j.balls) centers.push_back(b.center);
  f.max_center_d2 = ComputableCompactSet::diam2_of(centers);
  return f;
}

enum class Bound { Less, Geq };

inline const char* to_string(Bound b) { return b == Bound::Less ? "LESS" : "GEQ"; }

/// LESS iff fdiam(j) < c.
inline Bound fdiam_cmp(const UnionCode& j, const Rational& c) {
  return cmp_quad(fdiam(j).value(), QuadExpr(c)) == Cmp::Less ? Bound::Less : Bound::Geq;
}

/// A rational in [fdiam(j), fdiam(j) + 2^-k).
inline Rational fdiam_approx(const UnionCode& j, unsigned k) {
  auto f = fdiam(j);
  return sqrt_upper(f.max_center_d2, k + 1) + 2 * f.max_radius;
}

/// fmesh(l) = max over u in [l] of fdiam(u); LESS iff fmesh(l) < c.
inline Bound fmesh_cmp(const FamilyCode& l, const Rational& c) {
  for (const auto& u : l.links)
    if (fdiam_cmp(u, c) == Bound::Geq) return Bound::Geq;
  return Bound::Less;
}

/// A rational in [fmesh(l), fmesh(l) + 2^-k).
inline Rational fmesh_approx(const FamilyCode& l, unsigned k) {
  Rational m = 0;
  for (const auto& u : l.links) m = rmax(m, fdiam_approx(u, k));
  return m;
}

// ---------------------------------------------------------------------------
// K <=_eps J_j

namespace detail {

/// One stage of the K <=_eps J_j check using the 2^-m approximation P of K:
/// every point of P lies at distance < rho - 2^-m from some center (so K is
/// covered), and every ball has a point of P at distance < rho - 2^-m (so the
/// ball meets K).
inline bool subset_eps_stage(const std::vector<Point>& pts, unsigned m, const UnionCode& j, const BallIndex& idx,
                             Fuel& fuel) {
  Rational e = pow2(-static_cast<long>(m));
  for (const auto& p : pts) {
    fuel.spend();
    bool ok = false;
    idx.near(p, [&](const BallIndex::Entry& en) {
      if (!ok && dist_plus_lt(p, en.ball->center, e, en.ball->radius)) ok = true;
    });
    if (!ok) return false;
  }
  // Meeting: index the points, visit those near each center.
  Rational maxr = j.max_radius();
  GridIndex pidx(2.02 * maxr.get_d() + 1e-300);
  for (std::uint32_t i = 0; i < pts.size(); ++i) pidx.insert(to_doubles(pts[i]), i);
  for (const auto& b : j.balls) {
    fuel.spend();
    bool ok = false;
    pidx.visit(to_doubles(b.center), 1, [&](std::uint32_t i) {
      if (!ok && dist_plus_lt(pts[i], b.center, e, b.radius)) ok = true;
    });
    if (!ok) return false;
  }
  return true;
}

/// Called with (K, eps, j) on every YES of subset_eps_semidecide. A hook for
/// test harnesses; empty by default.
using SubsetEpsObserver = std::function<void(const ComputableCompactSet&, const Rational&, const UnionCode&)>;

inline SubsetEpsObserver& subset_eps_observer() {
  static thread_local SubsetEpsObserver observer;
  return observer;
}

}  // namespace detail

/// Semidecides K <=_eps J_j: K subset J_j, every ball of j meets K, every
/// radius < eps. YES is sound for the true set K. The radius condition is
/// decidable; when it fails the answer is TIMEOUT without spending fuel.
inline Semi subset_eps_semidecide(const ComputableCompactSet& k_set, const Rational& eps, const UnionCode& j,
                                  Fuel& fuel, unsigned max_stage = 40) {
  if (j.empty()) return Semi::Timeout;
  for (const auto& b : j.balls)
    if (!(b.radius < eps)) return Semi::Timeout;
  if (fuel.exhausted()) return Semi::Timeout;
  BallIndex idx(j);
  // Stages with 2^-m >= min radius cannot certify anything.
  unsigned m0 = static_cast<unsigned>(floor_log2_inv(rmin(j.min_radius(), Rational(1)))) + 1;
  try {
    for (unsigned m = m0; m <= max_stage; ++m) {
      const auto& pts = k_set.approx(m);
      fuel.spend(pts.size());  // generating the approximation is work too
      if (!detail::subset_eps_stage(pts, m, j, idx, fuel)) continue;
      if (auto& obs = detail::subset_eps_observer()) obs(k_set, eps, j);
      return Semi::Yes;
    }
  } catch (const FuelExhausted&) {
  }
  return Semi::Timeout;
}

}  // namespace semigraph
