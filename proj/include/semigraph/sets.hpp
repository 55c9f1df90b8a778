#pragma once

// Representations of closed sets through semideciders, and the
// representation-level constructions on them.
//
// A c.e. set is given by hits(ball, stage); a semicomputable compact set by
// covers(union, stage); a semicomputable set by omega(ball, union, stage).
// Each semidecider is monotone in the stage: once it answers true it keeps
// doing so, and every true instance is answered true at some stage. The
// enumerators dovetail these over codes and stages.

#include "semigraph/compact_set.hpp"
#include "semigraph/formal.hpp"
#include "semigraph/fuel.hpp"
#include "semigraph/metric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <functional>
#include <set>
#include <utility>
#include <vector>

namespace semigraph {

/// A closed set S with {i | I_i meets S} c.e.
class CeClosedSet {
public:
  using Hits = std::function<bool(const Ball&, unsigned, Fuel&)>;

  CeClosedSet() = default;
  CeClosedSet(std::size_t dim, Hits h) : dim_(dim), hits_(std::move(h)) {}

  std::size_t dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(hits_); }
  bool hits(const Ball& b, unsigned stage, Fuel& fuel) const { return hits_(b, stage, fuel); }

private:
  std::size_t dim_ = 0;
  Hits hits_;
};

/// A compact set S with {j | S subset J_j} c.e.
class SemicompactSet {
public:
  using Covers = std::function<bool(const UnionCode&, unsigned, Fuel&)>;

  SemicompactSet() = default;
  SemicompactSet(std::size_t dim, Covers c) : dim_(dim), covers_(std::move(c)) {}

  std::size_t dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(covers_); }
  bool covers(const UnionCode& j, unsigned stage, Fuel& fuel) const { return covers_(j, stage, fuel); }

private:
  std::size_t dim_ = 0;
  Covers covers_;
};

/// A closed set S, compact on closed balls, with {(i, j) | I-hat_i n S subset J_j} c.e.
class SemicomputableSet {
public:
  using Omega = std::function<bool(const Ball&, const UnionCode&, unsigned, Fuel&)>;

  SemicomputableSet() = default;
  SemicomputableSet(std::size_t dim, Omega o) : dim_(dim), omega_(std::move(o)) {}

  std::size_t dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(omega_); }
  bool ball_compact() const { return true; }
  bool omega(const Ball& i, const UnionCode& j, unsigned stage, Fuel& fuel) const {
    return omega_(i, j, stage, fuel);
  }

private:
  std::size_t dim_ = 0;
  Omega omega_;
};

// ---------------------------------------------------------------------------
// Enumerators

/// Emits ball codes i with I_i meeting S, dovetailing code n at stage s over
/// the diagonals n + s = 0, 1, 2, ...
class HitsEnumerator {
public:
  explicit HitsEnumerator(CeClosedSet s) : set_(std::move(s)) {}

  std::optional<Natural> next(Fuel& fuel) {
    try {
      for (;;) {
        unsigned long n = diag_ - pos_;
        unsigned s = static_cast<unsigned>(pos_);
        advance();
        if (emitted_.count(n)) continue;
        fuel.spend();
        Natural code(n);
        if (set_.hits(ball_of(code, set_.dim()), s, fuel)) {
          emitted_.insert(n);
          return code;
        }
      }
    } catch (const FuelExhausted&) {
      return std::nullopt;
    }
  }

private:
  void advance() {
    if (pos_ == diag_) {
      ++diag_;
      pos_ = 0;
    } else {
      ++pos_;
    }
  }

  CeClosedSet set_;
  unsigned long diag_ = 0, pos_ = 0;
  std::set<unsigned long> emitted_;
};

/// Emits pairs (i, j) accepted by omega, dovetailing the pair code n at
/// stage s; j ranges over nonempty sequence codes.
class OmegaEnumerator {
public:
  explicit OmegaEnumerator(SemicomputableSet s) : set_(std::move(s)) {}

  std::optional<std::pair<Natural, Natural>> next(Fuel& fuel) {
    try {
      for (;;) {
        unsigned long n = diag_ - pos_;
        unsigned s = static_cast<unsigned>(pos_);
        if (pos_ == diag_) {
          ++diag_;
          pos_ = 0;
        } else {
          ++pos_;
        }
        if (emitted_.count(n)) continue;
        fuel.spend();
        auto [i, j] = encoding::unpair(Natural(n));
        Ball b = ball_of(i, set_.dim());
        UnionCode u = UnionCode::from_code(j, set_.dim());
        if (set_.omega(b, u, s, fuel)) {
          emitted_.insert(n);
          return std::make_pair(i, j);
        }
      }
    } catch (const FuelExhausted&) {
      return std::nullopt;
    }
  }

private:
  SemicomputableSet set_;
  unsigned long diag_ = 0, pos_ = 0;
  std::set<unsigned long> emitted_;
};

// ---------------------------------------------------------------------------
// Constructions

/// A code decoding to [a] u [b] (duplicates of a's balls are dropped).
inline UnionCode union_code(const UnionCode& a, const UnionCode& b) {
  UnionCode r = a;
  for (const auto& x : b.balls)
    if (std::find(a.balls.begin(), a.balls.end(), x) == a.balls.end()) r.balls.push_back(x);
  return r;
}

/// S \ J_m: omega'(i, j) = omega(i, j u m).
inline SemicomputableSet subtract_union(const SemicomputableSet& s, const UnionCode& m) {
  return SemicomputableSet(s.dim(), [s, m](const Ball& i, const UnionCode& j, unsigned st, Fuel& f) {
    return s.omega(i, union_of(j, m), st, f);
  });
}

/// I-hat_i n S as a semicomputable compact set.
inline SemicompactSet restrict_to_ball(const SemicomputableSet& s, const Ball& i) {
  return SemicompactSet(s.dim(), [s, i](const UnionCode& j, unsigned st, Fuel& f) { return s.omega(i, j, st, f); });
}

/// A u B for semicomputable A, B.
inline SemicomputableSet union_sets(const SemicomputableSet& a, const SemicomputableSet& b) {
  return SemicomputableSet(a.dim(), [a, b](const Ball& i, const UnionCode& j, unsigned st, Fuel& f) {
    return a.omega(i, j, st, f) && b.omega(i, j, st, f);
  });
}

/// A computable compact K as a semicomputable set. At stage s, for some
/// k <= s, every point p of K's 2^-k approximation lies farther than
/// rho + 2^-k from the query center or within rho' - 2^-k of a center of J.
/// Coarse approximations settle queries far from K without refining it.
inline SemicomputableSet semicomputable_of(const ComputableCompactSet& k) {
  return SemicomputableSet(k.dim(), [k](const Ball& i, const UnionCode& j, unsigned st, Fuel& f) {
    BallIndex idx(j);
    for (unsigned a = 0; a <= st; ++a) {
      Rational e = pow2(-static_cast<long>(a));
      bool all = true;
      for (const auto& p : k.approx(a)) {
        f.spend();
        if (dist_gt(p, i.center, i.radius + e)) continue;
        bool in = false;
        idx.near(p, [&](const BallIndex::Entry& en) {
          if (!in && dist_plus_lt(p, en.ball->center, e, en.ball->radius)) in = true;
        });
        if (!in) {
          all = false;
          break;
        }
      }
      if (all) return true;
    }
    return false;
  });
}

/// A computable compact K as a c.e. set: B meets K once some point of the
/// 2^-s approximation lies within rho - 2^-s of the center.
inline CeClosedSet ce_of(const ComputableCompactSet& k) {
  return CeClosedSet(k.dim(), [k](const Ball& b, unsigned st, Fuel& f) {
    Rational e = pow2(-static_cast<long>(st));
    for (const auto& p : k.approx(st)) {
      f.spend();
      if (dist_plus_lt(p, b.center, e, b.radius)) return true;
    }
    return false;
  });
}

// ---------------------------------------------------------------------------
// Cube covers

namespace detail {

/// Rational upper bound on half the diagonal of a unit cube in R^d.
inline Rational half_diag_factor(std::size_t d) {
  if (d == 1) return Rational(1, 2) + Rational(1, 64);
  if (d == 2) return Rational(3, 4);
  return sqrt_upper(Rational(static_cast<long>(d)), 8) / 2 + Rational(1, 64);
}

struct Cube {
  Point lo;
  Rational side;

  Point center() const {
    Point c = lo;
    for (auto& x : c) x += side / 2;
    return c;
  }
  Ball ball() const { return Ball(center(), side * half_diag_factor(lo.size())); }
  std::vector<Cube> children() const {
    std::size_t d = lo.size();
    std::vector<Cube> out;
    Rational h = side / 2;
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      Cube c{lo, h};
      for (std::size_t k = 0; k < d; ++k)
        if (mask & (std::size_t{1} << k)) c.lo[k] += h;
      out.push_back(std::move(c));
    }
    return out;
  }
};

inline Cube cube_around(const Point& center, const Rational& half) {
  Cube c{center, 2 * half};
  for (auto& x : c.lo) x -= half;
  return c;
}

}  // namespace detail

/// Finds t with S subset B(0, 2^t), dovetailing t against the stage.
inline std::optional<long> bounding_exponent(const SemicompactSet& s, Fuel& fuel, long t_max = 40) {
  Point origin(s.dim(), Rational(0));
  for (long d = 0; d <= 2 * t_max; ++d)
    for (long t = 0; t <= std::min(d, t_max); ++t) {
      fuel.spend();
      UnionCode j({Ball(origin, pow2(t))});
      if (s.covers(j, static_cast<unsigned>(d - t), fuel)) return t;
    }
  return std::nullopt;
}

/// A finite set P with S close to P within 2^-k, from S c.e. and semicompact.
/// At each stage, the cells of a cube tree whose balls are certified to meet S
/// are refined down to radius < 2^-(k+1); the surviving balls are accepted
/// once they are certified to cover S.
inline Outcome<std::vector<Point>> approximate(const CeClosedSet& sce, const SemicompactSet& ssc, unsigned k,
                                              Fuel& fuel, unsigned max_stage = 60) {
  return run_with_fuel(fuel, [&](Fuel& f) -> Outcome<std::vector<Point>> {
    StageLabel label(f, "approximate");
    auto t = bounding_exponent(ssc, f);
    if (!t) return Timeout{"approximate: no bounding ball"};
    Point origin(ssc.dim(), Rational(0));
    detail::Cube root = detail::cube_around(origin, pow2(*t));
    Rational target = pow2(-static_cast<long>(k) - 1);
    for (unsigned s = 0; s <= max_stage; ++s) {
      std::vector<detail::Cube> frontier{root}, leaves;
      while (!frontier.empty()) {
        std::vector<detail::Cube> next;
        for (auto& c : frontier) {
          Ball b = c.ball();
          if (!sce.hits(b, s, f)) continue;
          if (b.radius < target)
            leaves.push_back(c);
          else
            for (auto& ch : c.children()) next.push_back(std::move(ch));
        }
        frontier = std::move(next);
      }
      if (leaves.empty()) continue;
      UnionCode j;
      for (auto& c : leaves) j.balls.push_back(c.ball());
      if (ssc.covers(j, s, f)) {
        std::vector<Point> out;
        for (auto& b : j.balls) out.push_back(b.center);
        return out;
      }
    }
    return Timeout{"approximate: stage limit"};
  });
}

/// A code j with A subset_eps J_j. Points of a 2^-m approximation of A with
/// 2^-m <= rho/8 are thinned greedily so that every point is within rho/4 of
/// a kept one; the kept points become centers of radius rho = eps/2.
inline Outcome<UnionCode> separator_search(const ComputableCompactSet& a, const Rational& eps, Fuel& fuel) {
  return run_with_fuel(fuel, [&](Fuel& f) -> Outcome<UnionCode> {
    StageLabel label(f, "separator_search");
    f.spend();
    Rational rho = eps / 2;
    unsigned m = static_cast<unsigned>(floor_log2_inv(rho / 8));
    const auto& pts = a.approx(m);
    Rational q = rho / 4;
    GridIndex grid(2.02 * q.get_d() + 1e-300);
    std::vector<Point> kept;
    for (const auto& p : pts) {
      f.spend();
      bool near = false;
      grid.visit(to_doubles(p), 1, [&](std::uint32_t id) {
        if (!near && dist_lt(p, kept[id], q)) near = true;
      });
      if (near) continue;
      grid.insert(to_doubles(p), static_cast<std::uint32_t>(kept.size()));
      kept.push_back(p);
    }
    UnionCode j;
    for (auto& c : kept) j.balls.emplace_back(c, rho);
    if (subset_eps_semidecide(a, eps, j, f) != Semi::Yes) throw FuelExhausted{"separator_search"};
    return j;
  });
}

/// Result of carving K subset S' subset U out of S.
struct Carved {
  Ball ball;        // I-hat_i containing K
  UnionCode m;      // J_m, formally disjoint from K, covering (I-hat_i n S) \ U
  SemicompactSet set;  // S' = (I-hat_i n S) \ J_m
};

namespace detail {

/// K's approximations at several precisions, each hashed on a grid matched
/// to its precision, for testing formal disjointness of balls from K.
class KProbe {
public:
  explicit KProbe(const ComputableCompactSet& k) : k_(k) {}

  /// True when every point of a 2^-m approximation (2^-m about rho/8) lies
  /// farther than rho + 2^-m from the center, so B-hat misses K.
  bool misses(const Ball& b, Fuel& f) {
    long m = std::clamp<long>(floor_log2_inv(b.radius / 8), 2, 14);
    auto& lv = level(static_cast<unsigned>(m));
    Rational e = pow2(-m);
    Rational reach = b.radius + e;
    int cells = static_cast<int>(std::ceil(reach.get_d() / lv.grid.cell())) + 1;
    bool hit = false;
    f.spend();
    lv.grid.visit(to_doubles(b.center), cells, [&](std::uint32_t id) {
      if (!hit && !dist_gt((*lv.pts)[id], b.center, reach)) hit = true;
    });
    return !hit;
  }

private:
  struct Level {
    const std::vector<Point>* pts;
    GridIndex grid;
  };

  Level& level(unsigned m) {
    auto it = levels_.find(m);
    if (it != levels_.end()) return it->second;
    Level lv{&k_.approx(m), GridIndex(std::ldexp(4.0, -static_cast<int>(m)))};
    for (std::uint32_t id = 0; id < lv.pts->size(); ++id) lv.grid.insert(to_doubles((*lv.pts)[id]), id);
    return levels_.emplace(m, std::move(lv)).first->second;
  }

  ComputableCompactSet k_;
  std::map<unsigned, Level> levels_;
};

}  // namespace detail

/// Carves a semicompact S' with K subset S' subset U from S, where U is the
/// open union J_u and K subset U n S. The ball I-hat_i contains K. J_m is
/// built from a cube tree over I-hat_i: a cell whose ball is formally
/// disjoint from K joins m, a cell whose ball is formally inside U is
/// dropped, and other cells are split down to the depth cap. The choice is
/// accepted once omega(i, m u U) certifies (I-hat_i n S) \ U subset J_m.
inline Outcome<Carved> carve_compact(const SemicomputableSet& s, const ComputableCompactSet& k, const UnionCode& u,
                                     Fuel& fuel, unsigned max_depth = 16) {
  return run_with_fuel(fuel, [&](Fuel& f) -> Outcome<Carved> {
    StageLabel label(f, "carve_compact");
    f.spend();
    const long mk = 10;
    Rational e = pow2(-mk);
    Point c = k.approx(mk).front();
    Rational radius = k.diam_upper() + 2 * e + Rational(1, 64);
    Ball bi(c, radius);
    BallIndex uidx(u);
    detail::KProbe probe(k);
    UnionCode m;
    std::vector<detail::Cube> frontier{detail::cube_around(c, radius)};
    for (unsigned depth = 0; depth <= max_depth && !frontier.empty(); ++depth) {
      std::vector<detail::Cube> next;
      for (auto& cell : frontier) {
        Ball b = cell.ball();
        if (dist_gt(b.center, bi.center, bi.radius + b.radius)) continue;
        if (probe.misses(b, f)) {
          m.balls.push_back(std::move(b));
          continue;
        }
        bool inside_u = false;
        uidx.near(b.center, [&](const BallIndex::Entry& en) {
          if (!inside_u && f_contained_balls(b, *en.ball)) inside_u = true;
        });
        if (inside_u) continue;
        for (auto& ch : cell.children()) next.push_back(std::move(ch));
      }
      frontier = std::move(next);
      if (!frontier.empty()) continue;
      // Every cell is decided: certify.
      if (m.empty()) m.balls.emplace_back(add(c, Point(c.size(), 4 * radius)), radius);
      UnionCode mu = union_of(m, u);
      unsigned s0 = static_cast<unsigned>(floor_log2_inv(rmin(u.min_radius(), m.min_radius()))) + 2;
      for (unsigned st = s0; st <= s0 + 8; ++st) {
        if (s.omega(bi, mu, st, f)) {
          SemicomputableSet sc = s;
          UnionCode mm = m;
          SemicompactSet sp(s.dim(), [sc, bi, mm](const UnionCode& j, unsigned stg, Fuel& ff) {
            return sc.omega(bi, union_of(j, mm), stg, ff);
          });
          return Carved{bi, std::move(m), std::move(sp)};
        }
      }
      return Timeout{"carve_compact: omega did not certify"};
    }
    return Timeout{"carve_compact: depth limit"};
  });
}

}  // namespace semigraph
