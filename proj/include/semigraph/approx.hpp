#pragma once

// The computable-neighbourhood construction for points of a semicomputable
// set that have a chart neighbourhood homeomorphic to R, the endpoint cut,
// and the graph-approximation driver built on them.
//
// A chart f : [-4, 4] -> S is a rational polyline parametrization. From it we
// carve a semicompact S' with f([-3, 3]) subset S' subset f(<-4, 4>), seed a
// formal chain l_0 by inflating a fine subdivision of f, and refine it stage
// by stage: every l_{n+1} is formally inside l_n, keeps the first and last
// link inside the first and last link of l_n, has at most half its mesh, and
// still covers S' between unions J_p, J_q that hold the points a~ = f(t_a)
// and b~ = f(t_b). The first-ball centers of l_n approximate the limit arc N'.

#include "semigraph/chains.hpp"
#include "semigraph/fixture.hpp"
#include "semigraph/formal.hpp"
#include "semigraph/fuel.hpp"
#include "semigraph/geometry.hpp"
#include "semigraph/sets.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace semigraph {

// ---------------------------------------------------------------------------
// Charts

/// f(s) = path(from + (s + 4)(to - from)/8), s in [-4, 4].
class Chart {
public:
  Chart() = default;
  Chart(PolylinePath path, Rational from, Rational to)
      : path_(std::move(path)), from_(std::move(from)), to_(std::move(to)) {}

  const PolylinePath& path() const { return path_; }
  std::size_t dim() const { return path_.dim(); }
  Rational param(const Rational& s) const { return from_ + (s + 4) * (to_ - from_) / 8; }
  Point eval(const Rational& s) const { return path_.eval(param(s)); }

  /// Vertices of the polyline f([s0, s1]) in the order of s (s0 < s1).
  std::vector<Point> points(const Rational& s0, const Rational& s1) const {
    Rational p0 = param(s0), p1 = param(s1);
    if (p0 <= p1) return path_.sub_points(p0, p1);
    auto v = path_.sub_points(p1, p0);
    std::reverse(v.begin(), v.end());
    return v;
  }

  Rational diam2(const Rational& s0, const Rational& s1) const {
    Rational p0 = param(s0), p1 = param(s1);
    return p0 <= p1 ? path_.diam2(p0, p1) : path_.diam2(p1, p0);
  }

  /// f([s0, s1]) as a computable compact set, sampled in the order of s.
  ComputableCompactSet piece(const Rational& s0, const Rational& s1) const {
    PolylinePath sub(points(s0, s1));
    Rational n = sub.max_param();
    return ComputableCompactSet(dim(), [sub, n](unsigned k) { return sub.sample(0, n, pow2(-static_cast<long>(k))); });
  }

private:
  PolylinePath path_;
  Rational from_, to_;
};

/// eps with d(f(s), f(t)) < eps implying |s - t| < 1/2 on [-4, 4], capped
/// below 1. The minimum distance between images of cells of width 1/16 that
/// contain parameters 1/2 apart is computed exactly and taken below its root.
inline Rational chart_epsilon(const Chart& f) {
  const Rational h(1, 16);
  const long cells = 128;
  std::vector<std::vector<Point>> img(cells);
  for (long c = 0; c < cells; ++c) img[c] = f.points(-4 + h * c, -4 + h * (c + 1));
  Rational best = -1;
  for (long a = 0; a < cells; ++a)
    for (long b = a; b < cells; ++b) {
      if (h * (b + 1 - a) < Rational(1, 2)) continue;
      for (std::size_t x = 0; x + 1 < img[a].size(); ++x)
        for (std::size_t y = 0; y + 1 < img[b].size(); ++y) {
          Rational d = seg_seg_dist2(img[a][x], img[a][x + 1], img[b][y], img[b][y + 1]);
          if (best < 0 || d < best) best = d;
        }
    }
  return rmin(sqrt_lower(best, 40), Rational(15, 16));
}

/// Squared distance from f([-7/2, 7/2]) to the given pieces of S.
inline Rational chart_clearance2(const Chart& f, const std::vector<Capsule>& others) {
  auto inner = f.points(Rational(-7, 2), Rational(7, 2));
  Rational best = -1;
  for (std::size_t x = 0; x + 1 < inner.size(); ++x)
    for (const auto& o : others) {
      Rational d = seg_seg_dist2(inner[x], inner[x + 1], o.a, o.b, false, o.ray);
      if (best < 0 || d < best) best = d;
    }
  return best < 0 ? Rational(1) : best;
}

/// The pieces of S outside f(<-4, 4>) for a chart on a known edge polyline
/// with parameter range [pmin, pmax]; carriers stand in for hidden tails.
inline std::vector<Capsule> chart_others(const GraphFixture& fx, const std::string& edge_id, const Rational& pmin,
                                         const Rational& pmax) {
  std::vector<Capsule> out;
  for (const auto& e : fx.edges) {
    if (e.id != edge_id) {
      for (std::size_t k = 0; k + 1 < e.points.size(); ++k) out.push_back({e.points[k], e.points[k + 1], 0, false});
      if (e.is_ray()) out.push_back({e.points.back(), add(e.points.back(), e.direction), 0, true});
    } else {
      PolylinePath path = e.path();
      auto seg_list = [&](const Rational& t0, const Rational& t1) {
        if (!(t0 < t1)) return;
        auto pts = path.sub_points(t0, t1);
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) out.push_back({pts[k], pts[k + 1], 0, false});
      };
      seg_list(0, pmin);
      seg_list(pmax, path.max_param());
      if (e.is_ray()) {
        if (e.points.size() >= 2)
          out.push_back({e.points.back(), add(e.points.back(), e.direction), 0, true});
        else
          out.push_back({path.eval(pmax), add(path.eval(pmax), e.direction), 0, true});
      }
    }
    if (e.hidden_start) out.push_back({e.points.front(), e.hidden_start->carrier, 0, false});
    if (e.hidden_end) out.push_back({e.points.back(), e.hidden_end->carrier, 0, false});
  }
  return out;
}

inline Chart fixture_chart(const GraphFixture& fx, const ChartSpec& spec) {
  return Chart(fx.edge(spec.edge).path(), spec.from, spec.to);
}

// ---------------------------------------------------------------------------
// Helpers on unions

namespace detail {

/// Greedy thinning: balls of radius rho at points of `pts` so that every
/// point is within rho/4 of a kept center.
inline UnionCode uniform_cover(const std::vector<Point>& pts, const Rational& rho, Fuel& f) {
  Rational q = rho / 4;
  GridIndex grid(2.02 * q.get_d() + 1e-300);
  UnionCode j;
  for (const auto& p : pts) {
    f.spend();
    bool near = false;
    auto pd = to_doubles(p);
    grid.visit(pd, 1, [&](std::uint32_t id) {
      if (!near && dist_lt(p, j.balls[id].center, q)) near = true;
    });
    if (near) continue;
    grid.insert(pd, static_cast<std::uint32_t>(j.balls.size()));
    j.balls.emplace_back(p, rho);
  }
  return j;
}

/// Balls along an ordered point list with radius growing with the distance
/// from `avoid` (points of nonadjacent links): rho_c = min(cap, max(rho,
/// d/3)). Each point is within rho_c/3 of the last kept center.
inline UnionCode graded_cover(const std::vector<Point>& pts, const Rational& rho, const Rational& cap,
                              const MultiGrid& avoid, Fuel& f) {
  UnionCode j;
  for (const auto& p : pts) {
    f.spend();
    if (!j.empty()) {
      const Ball& last = j.balls.back();
      if (dist_lt(p, last.center, last.radius / 3)) continue;
    }
    double d = avoid.lower_dist(to_doubles(p));
    Rational r = rho;
    if (d > 3 * rho.get_d()) {
      // A dyadic value just below d/3.
      long e = 0;
      while (std::ldexp(1.0, static_cast<int>(-e)) > d / 3) ++e;
      r = rmax(rho, pow2(-e));
    }
    r = rmin(r, cap);
    j.balls.emplace_back(p, r);
  }
  return j;
}

/// Semidecides K subset J_j with margin `extra`: at stage m every point of
/// K's 2^-m approximation is within rho - 2^-m - extra of a center of j.
inline bool confirm_inside(const ComputableCompactSet& k, const UnionCode& j, unsigned m0, unsigned tries, Fuel& f,
                           const Rational& extra = 0) {
  std::optional<BallIndex> idx;
  if (j.size() > 16) idx.emplace(j);
  for (unsigned m = m0; m < m0 + tries; ++m) {
    Rational e = pow2(-static_cast<long>(m)) + extra;
    bool all = true;
    for (const auto& p : k.approx(m)) {
      f.spend();
      bool in = false;
      if (idx) {
        idx->near(p, [&](const BallIndex::Entry& en) {
          if (!in && dist_plus_lt(p, en.ball->center, e, en.ball->radius)) in = true;
        });
      } else {
        for (const auto& b : j.balls)
          if (dist_plus_lt(p, b.center, e, b.radius)) {
            in = true;
            break;
          }
      }
      if (!in) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

/// Semidecides x in J_j for a computable point x.
inline bool point_in_union(const ComputablePoint& x, const UnionCode& j, unsigned k_max, Fuel& f) {
  for (unsigned k = 0; k <= k_max; ++k) {
    Point p = point_approx(x, k);
    Rational e = pow2(-static_cast<long>(k));
    for (const auto& b : j.balls) {
      f.spend();
      if (dist_plus_lt(p, b.center, e, b.radius)) return true;
    }
  }
  return false;
}

/// Semidecides d(x, J_j) < c: some ball has d(x, center) < rho + c.
inline bool point_near_union(const ComputablePoint& x, const UnionCode& j, const Rational& c, unsigned k_max, Fuel& f) {
  for (unsigned k = 0; k <= k_max; ++k) {
    Point p = point_approx(x, k);
    Rational e = pow2(-static_cast<long>(k));
    for (const auto& b : j.balls) {
      f.spend();
      if (dist_plus_lt(p, b.center, e, b.radius + c)) return true;
    }
  }
  return false;
}

inline FamilyCode full_chain(const UnionCode& p, const FamilyCode& l, const UnionCode& q) {
  FamilyCode c;
  c.links.reserve(l.size() + 2);
  c.links.push_back(p);
  c.links.insert(c.links.end(), l.links.begin(), l.links.end());
  c.links.push_back(q);
  return c;
}

inline UnionCode flatten(const FamilyCode& c) {
  UnionCode u;
  for (const auto& l : c.links) u.balls.insert(u.balls.end(), l.balls.begin(), l.balls.end());
  return u;
}

/// Index of a union of l with maximal fdiam, compared exactly.
inline std::size_t fmesh_argmax(const FamilyCode& l) {
  std::size_t best = 0;
  QuadExpr bv = fdiam(l.links[0]).value();
  for (std::size_t u = 1; u < l.size(); ++u) {
    QuadExpr v = fdiam(l.links[u]).value();
    if (cmp_quad(v, bv) == Cmp::Greater) {
      best = u;
      bv = v;
    }
  }
  return best;
}

/// fmesh(fine) < fmesh(coarse) / 2, exactly.
inline bool mesh_halves(const FamilyCode& fine, const FamilyCode& coarse) {
  FormalDiameter top = fdiam(coarse.links[fmesh_argmax(coarse)]);
  QuadExpr half(top.max_radius, Rational(1, 2), top.max_center_d2);
  for (const auto& u : fine.links)
    if (cmp_quad(fdiam(u).value(), half) != Cmp::Less) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quasi-chain inflation

struct Inflated {
  UnionCode p;
  FamilyCode l;
  UnionCode q;
};

/// Finds codes p, l, q for a compact quasi-chain (K_0, ..., K_{n+1}) with
/// (a) K_0 <=_eps J_p, K_{n+1} <=_eps J_q, K_i <=_eps J_{(l)_{i-1}};
/// (b) (J_p, J_{(l)_0}, ..., J_q) a formal chain;
/// (c) every code formally inside each J_a, a in A, that its link is
///     confirmed to lie in with margin at least its ball radius.
/// Middle links get balls of one radius rho; the two end links get balls that
/// grow away from the other links. rho starts at rho_start (default eps/2)
/// and shrinks by 3/4 per attempt.
inline Outcome<Inflated> inflate_quasichain(const std::vector<ComputableCompactSet>& k,
                                            const std::vector<UnionCode>& a, const Rational& eps, Fuel& fuel,
                                            std::optional<Rational> rho_start = std::nullopt,
                                            unsigned attempts = 24) {
  return run_with_fuel(fuel, [&](Fuel& f) -> Outcome<Inflated> {
    StageLabel label(f, "inflate_quasichain");
    f.spend();
    if (k.size() < 2) throw ContractViolation("inflate_quasichain: need at least two links");
    std::vector<UnionCode> a_nonempty;
    for (const auto& u : a)
      if (!u.empty()) a_nonempty.push_back(u);
    BallIndex a_idx{std::span<const UnionCode>(a_nonempty)};
    Rational rho = rho_start ? *rho_start : eps / 2;
    if (!(rho < eps)) rho = eps / 2;
    const std::size_t n = k.size();
    for (unsigned attempt = 0; attempt < attempts; ++attempt, rho = rho * 3 / 4) {
      unsigned m = static_cast<unsigned>(floor_log2_inv(rho / 8));
      std::vector<UnionCode> codes(n);
      for (std::size_t u = 1; u + 1 < n; ++u) codes[u] = detail::uniform_cover(k[u].approx(m), rho, f);
      double base = rho.get_d();
      MultiGrid avoid_first(base, 40), avoid_last(base, 40);
      for (std::size_t u = 0; u < n; ++u)
        for (const auto& p : k[u].approx(m)) {
          auto pd = to_doubles(p);
          if (u >= 2) avoid_first.insert(pd);
          if (u + 2 < n) avoid_last.insert(pd);
        }
      Rational cap = eps / 2;
      codes[0] = detail::graded_cover(k[0].approx(m), rho, cap, avoid_first, f);
      codes[n - 1] = detail::graded_cover(k[n - 1].approx(m), rho, cap, avoid_last, f);

      FamilyCode chain;
      chain.links = codes;
      if (!is_formal_chain(chain)) continue;

      bool ok = true;
      for (std::size_t u = 0; u < n && ok; ++u) {
        if (subset_eps_semidecide(k[u], eps, codes[u], f, m + 8) != Semi::Yes) ok = false;
        if (!ok || a_nonempty.empty()) continue;
        // Candidate targets: unions with a ball containing the link's first point.
        const Point& p0 = k[u].approx(m).front();
        std::vector<std::uint32_t> owners;
        a_idx.near(p0, [&](const BallIndex::Entry& en) {
          if (dist_lt(p0, en.ball->center, en.ball->radius)) owners.push_back(en.owner);
        });
        std::sort(owners.begin(), owners.end());
        owners.erase(std::unique(owners.begin(), owners.end()), owners.end());
        for (auto o : owners) {
          if (!detail::confirm_inside(k[u], a_nonempty[o], m, 1, f, codes[u].max_radius())) continue;
          if (!f_contained_unions(codes[u], a_nonempty[o])) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;
      Inflated out;
      out.p = codes.front();
      out.q = codes.back();
      out.l.links.assign(codes.begin() + 1, codes.end() - 1);
      return out;
    }
    return Timeout{"inflate_quasichain: radius search exhausted"};
  });
}

// ---------------------------------------------------------------------------
// Neighbourhood context and the set Omega

struct NeighbourhoodContext {
  SemicomputableSet s;
  Carved carved;  // S' and the data it was carved with
  Chart f;
  Rational eps;
  Rational t_a, t_b;
  ComputablePoint a_t, b_t;
  UnionCode u;  // the open tube U around f([-7/2, 7/2])

  const SemicompactSet& sprime() const { return carved.set; }
};

/// Builds S' by carving f([-3, 3]) out of S inside a tube U around
/// f([-7/2, 7/2]) whose radius is below half the clearance, and fixes eps,
/// a~ = f(t_a), b~ = f(t_b).
inline Outcome<NeighbourhoodContext> build_context(const SemicomputableSet& s, const Chart& f,
                                                   const std::vector<Capsule>& others, const Rational& t_a,
                                                   const Rational& t_b, Fuel& fuel) {
  return run_with_fuel(fuel, [&](Fuel& fl) -> Outcome<NeighbourhoodContext> {
    StageLabel label(fl, "build_context");
    NeighbourhoodContext ctx;
    ctx.s = s;
    ctx.f = f;
    ctx.eps = chart_epsilon(f);
    ctx.t_a = t_a;
    ctx.t_b = t_b;
    ctx.a_t = ComputablePoint::constant(f.eval(t_a));
    ctx.b_t = ComputablePoint::constant(f.eval(t_b));
    Rational clear = sqrt_lower(chart_clearance2(f, others), 40);
    Rational r_u = rmin(clear / 2, ctx.eps / 4);
    if (!(r_u > 0)) return Timeout{"build_context: chart touches the rest of S"};
    PolylinePath inner(f.points(Rational(-7, 2), Rational(7, 2)));
    for (auto& p : inner.sample(0, inner.max_param(), r_u / 4)) ctx.u.balls.emplace_back(std::move(p), r_u);
    auto carved = carve_compact(s, f.piece(-3, 3), ctx.u, fl);
    if (!carved) return Timeout{carved.stage()};
    ctx.carved = std::move(*carved);
    return ctx;
  });
}

/// Omega membership of (p, l, q): S' subset J_p u J_[l] u J_q, the formal
/// chain (J_p, J_{(l)_0}, ..., J_q), a~ in J_p and b~ in J_q. The formal
/// chain condition is decided exactly and never answered YES when false.
inline Semi omega_semidecide(const NeighbourhoodContext& ctx, const UnionCode& p, const FamilyCode& l,
                             const UnionCode& q, Fuel& fuel, unsigned extra_stages = 8) {
  try {
    StageLabel label(fuel, "omega_semidecide");
    if (p.empty() || q.empty()) return Semi::Timeout;
    FamilyCode chain = detail::full_chain(p, l, q);
    if (!is_formal_chain(chain)) return Semi::Timeout;
    if (!detail::point_in_union(ctx.a_t, p, 40, fuel)) return Semi::Timeout;
    if (!detail::point_in_union(ctx.b_t, q, 40, fuel)) return Semi::Timeout;
    UnionCode all = detail::flatten(chain);
    unsigned s0 = static_cast<unsigned>(floor_log2_inv(rmin(all.min_radius(), Rational(1)))) + 2;
    for (unsigned st = s0; st <= s0 + extra_stages; ++st)
      if (ctx.sprime().covers(all, st, fuel)) return Semi::Yes;
  } catch (const FuelExhausted&) {
  }
  return Semi::Timeout;
}

/// One element of the chain sequence with the unions that certify it in
/// Omega. Link u of l is inflated from f([cuts[u], cuts[u+1]]); J_p and J_q
/// come from f([-4, cuts.front()]) and f([cuts.back(), 4]).
struct ChainStage {
  UnionCode p;
  FamilyCode l;
  UnionCode q;
  std::vector<Rational> cuts;
};

namespace detail {

/// The least N found by doubling and bisection with diam f([x_k, x_{k+1}]) < r
/// for the uniform subdivision x_k = -4 + 8k/N.
inline long subdivision_count(const Chart& f, const Rational& r, Fuel& fl) {
  Rational r2 = r * r;
  auto ok = [&](long n) {
    for (long k = 0; k < n; ++k) {
      fl.spend();
      if (!(f.diam2(-4 + Rational(8 * k, n), -4 + Rational(8 * (k + 1), n)) < r2)) return false;
    }
    return true;
  };
  long hi = 1;
  while (!ok(hi)) {
    if (hi > (1l << 26)) throw FuelExhausted{"subdivision_count"};
    hi *= 2;
  }
  long lo = hi / 2;
  while (hi - lo > 1) {
    long mid = (lo + hi) / 2;
    if (ok(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

inline Rational grid_point(long k, long n) { return -4 + Rational(8 * k, n); }

/// i with t_a in [x_i, x_{i+1}) and j with t_b in (x_j, x_{j+1}].
inline std::pair<long, long> anchor_pieces(const Rational& t_a, const Rational& t_b, long n) {
  Rational ia = (t_a + 4) * n / 8;
  Natural fi;
  mpz_fdiv_q(fi.get_mpz_t(), ia.get_num_mpz_t(), ia.get_den_mpz_t());
  Rational jb = (t_b + 4) * n / 8;
  Natural cj;
  mpz_cdiv_q(cj.get_mpz_t(), jb.get_num_mpz_t(), jb.get_den_mpz_t());
  return {fi.get_si(), cj.get_si() - 1};
}

/// Splits [s0, s1] into the fewest equal parts (at least two) whose images
/// have diameter < d; the inner split points.
inline std::optional<std::vector<Rational>> split_piece(const Chart& f, const Rational& s0, const Rational& s1,
                                                        const Rational& d, Fuel& fl) {
  Rational d2 = d * d;
  for (long q = 2; q <= 64; ++q) {
    bool ok = true;
    for (long k = 0; k < q && ok; ++k) {
      fl.spend();
      ok = f.diam2(s0 + (s1 - s0) * k / q, s0 + (s1 - s0) * (k + 1) / q) < d2;
    }
    if (!ok) continue;
    std::vector<Rational> inner;
    for (long k = 1; k < q; ++k) inner.push_back(s0 + (s1 - s0) * k / q);
    return inner;
  }
  return std::nullopt;
}

inline std::vector<ComputableCompactSet> quasichain_pieces(const Chart& f, const std::vector<Rational>& cuts) {
  std::vector<ComputableCompactSet> k;
  k.push_back(f.piece(-4, cuts.front()));
  for (std::size_t u = 0; u + 1 < cuts.size(); ++u) k.push_back(f.piece(cuts[u], cuts[u + 1]));
  k.push_back(f.piece(cuts.back(), 4));
  return k;
}

}  // namespace detail

/// An element l_0 of Omega with fmesh(l_0) < eps/2, d(a~, J_{(l_0)_0}) < eps/2
/// and d(b~, J_{last}) < eps/2: a subdivision with pieces of diameter
/// < eps/4, merged outside the anchors and inflated at eps/16.
inline Outcome<ChainStage> initial_chain(const NeighbourhoodContext& ctx, Fuel& fuel) {
  return run_with_fuel(fuel, [&](Fuel& fl) -> Outcome<ChainStage> {
    StageLabel label(fl, "initial_chain");
    fl.spend();
    long n = detail::subdivision_count(ctx.f, ctx.eps / 4, fl);
    auto [i, j] = detail::anchor_pieces(ctx.t_a, ctx.t_b, n);
    if (!(i >= 0 && j < n && j - i >= 2)) return Timeout{"initial_chain: anchors too close"};
    std::vector<Rational> cuts;
    for (long t = i + 1; t <= j; ++t) cuts.push_back(detail::grid_point(t, n));
    auto inf = inflate_quasichain(detail::quasichain_pieces(ctx.f, cuts), {}, ctx.eps / 16, fl);
    if (!inf) return Timeout{inf.stage()};
    ChainStage st{inf->p, inf->l, inf->q, std::move(cuts)};
    Rational half = ctx.eps / 2;
    if (fmesh_cmp(st.l, half) != Bound::Less) return Timeout{"initial_chain: mesh bound"};
    if (!detail::point_near_union(ctx.a_t, st.l.first(), half, 40, fl) ||
        !detail::point_near_union(ctx.b_t, st.l.last(), half, 40, fl))
      return Timeout{"initial_chain: anchor distance bound"};
    if (omega_semidecide(ctx, st.p, st.l, st.q, fl) != Semi::Yes) return Timeout{"initial_chain: omega"};
    return st;
  });
}

/// The conditions for (l, l') in Gamma: l' in Omega, every link of l'
/// formally inside a link of l, fmesh halved, and first (last) link inside
/// the first (last) link of l.
struct GammaCheck {
  bool in_omega = false, links_contained = false, mesh_halved = false, first_contained = false,
       last_contained = false;
  bool all() const { return in_omega && links_contained && mesh_halved && first_contained && last_contained; }
};

inline GammaCheck check_gamma(const NeighbourhoodContext& ctx, const ChainStage& cur, const ChainStage& next,
                              Fuel& fuel) {
  GammaCheck g;
  g.links_contained = f_contained_families(next.l, cur.l);
  g.mesh_halved = detail::mesh_halves(next.l, cur.l);
  g.first_contained = f_contained_unions(next.l.first(), cur.l.first());
  g.last_contained = f_contained_unions(next.l.last(), cur.l.last());
  if (g.links_contained && g.mesh_halved && g.first_contained && g.last_contained)
    g.in_omega = omega_semidecide(ctx, next.p, next.l, next.q, fuel) == Semi::Yes;
  return g;
}

/// psi: from l in Omega, an l' in Omega with (l, l') in Gamma. Every piece of
/// l is split into parts of diameter < fmesh(l)/2 - 2 rho, so each new piece
/// lies in one old piece; rho starts at 9/20 of the least radius of l, which
/// with centers thinned at rho/4 leaves room for formal containment. The new
/// first link is the last part of the old first piece and the new last link
/// the first part of the old last piece; everything outside merges into the
/// end links.
inline Outcome<ChainStage> refine_chain(const NeighbourhoodContext& ctx, const ChainStage& cur, Fuel& fuel,
                                        unsigned attempts = 8) {
  return run_with_fuel(fuel, [&](Fuel& fl) -> Outcome<ChainStage> {
    StageLabel label(fl, "refine_chain");
    fl.spend();
    if (cur.cuts.size() != cur.l.size() + 1) throw ContractViolation("refine_chain: cuts do not match the chain");
    Rational fm = fmesh_approx(cur.l, 30);
    Rational rho = detail::flatten(cur.l).min_radius() * 9 / 20;
    for (unsigned attempt = 0; attempt < attempts; ++attempt, rho = rho * 3 / 4) {
      Rational d = fm / 2 - 2 * rho - fm / 1024;
      if (!(d > 0)) continue;
      std::vector<std::vector<Rational>> parts;
      bool ok = true;
      for (std::size_t u = 0; u + 1 < cur.cuts.size() && ok; ++u) {
        auto inner = detail::split_piece(ctx.f, cur.cuts[u], cur.cuts[u + 1], d, fl);
        if (!inner) ok = false;
        else parts.push_back(std::move(*inner));
      }
      if (!ok) continue;
      // All split points in order, then the window from the last part of the
      // first piece to the first part of the last piece.
      std::vector<Rational> all;
      std::size_t first_end = 0, last_begin = 0;
      for (std::size_t u = 0; u < parts.size(); ++u) {
        all.push_back(cur.cuts[u]);
        if (u + 1 == parts.size()) last_begin = all.size() - 1;
        all.insert(all.end(), parts[u].begin(), parts[u].end());
        if (u == 0) first_end = all.size() - 1;
      }
      all.push_back(cur.cuts.back());
      std::size_t lo = cur.l.size() == 1 ? 0 : first_end;
      std::size_t hi = cur.l.size() == 1 ? all.size() - 1 : last_begin + 1;
      std::vector<Rational> cuts(all.begin() + lo, all.begin() + hi + 1);
      auto inf = inflate_quasichain(detail::quasichain_pieces(ctx.f, cuts), cur.l.links, fm, fl, rho, 1);
      if (!inf) continue;
      ChainStage next{inf->p, inf->l, inf->q, std::move(cuts)};
      if (check_gamma(ctx, cur, next, fl).all()) return next;
    }
    return Timeout{"refine_chain: attempts exhausted"};
  });
}

// ---------------------------------------------------------------------------
// The chain sequence and N'

/// l_0, l_1 = psi(l_0), ... generated on demand. Stages are generated with
/// the sequence's own fuel; running out raises FuelExhausted.
class ChainSequence {
public:
  ChainSequence(NeighbourhoodContext ctx, ChainStage l0, std::uint64_t budget)
      : ctx_(std::move(ctx)), fuel_(budget) {
    stages_.push_back(std::move(l0));
  }

  const NeighbourhoodContext& context() const { return ctx_; }
  std::size_t generated() const { return stages_.size(); }
  const Fuel& fuel() const { return fuel_; }

  const ChainStage& stage(std::size_t n) {
    while (stages_.size() <= n) {
      auto next = refine_chain(ctx_, stages_.back(), fuel_);
      if (!next) throw FuelExhausted{next.stage()};
      stages_.push_back(std::move(*next));
    }
    return stages_[n];
  }

  /// Already generated stage n; contract violation otherwise.
  const ChainStage& generated_stage(std::size_t n) const {
    if (n >= stages_.size()) throw ContractViolation("chain stage not generated");
    return stages_[n];
  }

  /// The first n with fmesh(l_n) < 2^-k.
  std::size_t stage_for(unsigned k) {
    Rational bound = pow2(-static_cast<long>(k));
    for (std::size_t n = 0;; ++n)
      if (fmesh_cmp(stage(n).l, bound) == Bound::Less) return n;
  }

private:
  NeighbourhoodContext ctx_;
  Fuel fuel_;
  std::vector<ChainStage> stages_;
};

/// {lambda_{(i)_0} | i in [l_k]}: the first-ball centers of the unions of l_k.
inline std::vector<Point> neighbourhood_approx(const ChainSequence& seq, std::size_t k) {
  const auto& st = seq.generated_stage(k);
  std::vector<Point> out;
  out.reserve(st.l.size());
  for (const auto& u : st.l.links) out.push_back(u.first_center());
  return out;
}

struct Neighbourhood {
  ComputablePoint a, b;
  ComputableCompactSet n;
  std::shared_ptr<ChainSequence> seq;
};

/// A computable arc N' subset S around f(0) from a to b. The approximations
/// at precision k use the first stage with fmesh < 2^-k.
inline Outcome<Neighbourhood> computable_neighbourhood(const SemicomputableSet& s, const Chart& f,
                                                       const std::vector<Capsule>& others, Fuel& fuel,
                                                       const Rational& t_a = -2, const Rational& t_b = 2,
                                                       std::uint64_t sequence_budget = 4'000'000'000ull) {
  return run_with_fuel(fuel, [&](Fuel& fl) -> Outcome<Neighbourhood> {
    StageLabel label(fl, "computable_neighbourhood");
    auto ctx = build_context(s, f, others, t_a, t_b, fl);
    if (!ctx) return Timeout{ctx.stage()};
    auto l0 = initial_chain(*ctx, fl);
    if (!l0) return Timeout{l0.stage()};
    auto seq = std::make_shared<ChainSequence>(std::move(*ctx), std::move(*l0), sequence_budget);
    Neighbourhood nb;
    nb.seq = seq;
    std::size_t dim = f.dim();
    nb.a = ComputablePoint(dim, [seq](unsigned k) { return seq->stage(seq->stage_for(k)).l.first().first_center(); });
    nb.b = ComputablePoint(dim, [seq](unsigned k) { return seq->stage(seq->stage_for(k)).l.last().first_center(); });
    nb.n = ComputableCompactSet(dim, [seq](unsigned k) {
      std::size_t n = seq->stage_for(k);
      seq->stage(n);
      return neighbourhood_approx(*seq, n);
    });
    return nb;
  });
}

// ---------------------------------------------------------------------------
// Cutting a hidden endpoint

/// A hidden end of an edge: S runs from the known vertex v along the carrier
/// P(tau) = v + tau (c - v) up to x* = P(tau*), 0 < tau* < 1. `others` holds
/// pieces that contain the rest of S.
struct TailSpec {
  Point v, c;
  std::vector<Capsule> others;

  Point at(const Rational& t) const { return lerp(v, c, t); }
};

inline TailSpec tail_spec(const GraphFixture& fx, const std::string& edge_id, bool at_start) {
  const Edge& e = fx.edge(edge_id);
  const auto& h = at_start ? e.hidden_start : e.hidden_end;
  if (!h) throw ContractViolation("tail_spec: edge '" + edge_id + "' has no hidden end there");
  TailSpec t;
  t.v = at_start ? e.points.front() : e.points.back();
  t.c = h->carrier;
  t.others = fx.known_segments();
  for (const auto& o : fx.edges) {
    if (o.hidden_start && !(o.id == edge_id && at_start))
      t.others.push_back({o.points.front(), o.hidden_start->carrier, 0, false});
    if (o.hidden_end && !(o.id == edge_id && !at_start))
      t.others.push_back({o.points.back(), o.hidden_end->carrier, 0, false});
  }
  return t;
}

/// tau* in (lo, hi).
struct TailBracket {
  Rational lo, hi;
  Rational l_lo, l_hi;  // bounds on |c - v|
};

namespace detail {

inline Rational clearance2_point(const std::vector<Capsule>& others, const Point& p) {
  Rational best = -1;
  for (const auto& o : others) {
    Rational d = seg_point_dist2(o.a, o.b, p, o.ray);
    if (best < 0 || d < best) best = d;
  }
  return best < 0 ? Rational(1) : best;
}

inline Rational clearance2_segment(const std::vector<Capsule>& others, const Point& a, const Point& b) {
  Rational best = -1;
  for (const auto& o : others) {
    Rational d = seg_seg_dist2(a, b, o.a, o.b, false, o.ray);
    if (best < 0 || d < best) best = d;
  }
  return best < 0 ? Rational(1) : best;
}

/// The parameter gap g between the chart center tau_t = hi - g and hi.
inline Rational cut_gap(const Rational& eps, const Rational& l_hi, const Rational& hi) {
  return rmin(eps / (4 * l_hi), hi / 2);
}

inline Natural floor_q(const Rational& x) {
  Natural r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

}  // namespace detail

/// Brackets tau* to within a quarter of the cut gap. At level q the balls
/// B(P(k 2^-q), |c - v|_lo 2^-q) that avoid the rest of S are probed: a hit
/// from the c.e. side gives tau* > sigma - 2^-q, and an Omega certificate
/// that the closed ball misses S gives tau* < sigma - rho / |c - v|_hi.
inline Outcome<TailBracket> bracket_tail(const SemicomputableSet& s, const CeClosedSet& sce, const TailSpec& t,
                                         const Rational& eps, Fuel& fuel, unsigned max_level = 40) {
  return run_with_fuel(fuel, [&](Fuel& f) -> Outcome<TailBracket> {
    StageLabel label(f, "bracket_tail");
    Rational len2 = dist2(t.v, t.c);
    TailBracket b{0, 1, sqrt_lower(len2, 30), sqrt_upper(len2, 30)};
    for (unsigned q = 2; q <= max_level; ++q) {
      if (b.hi - b.lo < detail::cut_gap(eps, b.l_hi, b.hi) / 4) return b;
      Rational h = pow2(-static_cast<long>(q));
      Rational rho = b.l_lo * h;
      auto clear = [&](const Point& p) { return detail::clearance2_point(t.others, p) > rho * rho; };
      Natural kmin = detail::floor_q(b.lo / h) + 1, kmax = detail::floor_q((b.hi + h) / h);
      for (Natural k = kmax; k >= kmin; k -= 1) {
        Rational sigma = Rational(k) * h;
        if (sigma >= 1) continue;
        Point p = t.at(sigma);
        if (!clear(p)) continue;
        Ball ball(p, rho);
        bool hit = false;
        for (unsigned st = q; st <= q + 4 && !hit; ++st) hit = sce.hits(ball, st, f);
        if (hit) {
          b.lo = rmax(b.lo, sigma - h);
          break;
        }
      }
      for (Natural k = detail::floor_q(b.lo / h) + 1; Rational(k) * h < b.hi + h; k += 1) {
        Rational sigma = Rational(k) * h;
        Rational top = sigma - rho / b.l_hi;
        if (top <= b.lo || sigma >= 1) continue;
        Point p = t.at(sigma);
        if (!clear(p)) continue;
        Ball ball(p, rho);
        Point far_center = p;
        far_center[0] += 4 * rho;
        UnionCode far;
        far.balls.emplace_back(far_center, rho / 2);
        bool empty = false;
        for (unsigned st = q + 2; st <= q + 8 && !empty; ++st) empty = s.omega(ball, far, st, f);
        if (empty) {
          b.hi = rmin(b.hi, top);
          break;
        }
      }
    }
    return Timeout{"bracket_tail: level limit"};
  });
}

struct CutResult {
  ComputablePoint z;  // the new endpoint f(a)
  SemicomputableSet s_new;  // S \ f([0, a>)
  Neighbourhood nb;
  UnionCode m;  // J_m: covers f([0, a>), meets S only inside f([0, b>)
  TailBracket bracket;
  Rational tau_t, delta;  // chart image P([tau_t - delta, tau_t + delta])
  Rational removed_diam_upper;  // bound on diam f([0, a]) and on d(x*, f([0, a]))
  ComputableCompactSet kept_carrier;  // P([0, tau_t])
};

/// Cuts the hidden end of a tail: chart around P(tau_t) with tau_t a gap
/// g <= eps/(4|c - v|) below the bracket top, the computable neighbourhood N'
/// from a to b there, J_m along the carrier from tau_t + delta/4 past tau*,
/// and S_new = (S \ J_m) u N'. f([0, a]) lies in P([tau_t - delta, tau*]),
/// whose diameter is at most 5 eps/16.
inline Outcome<CutResult> cut_endpoint(const SemicomputableSet& s, const CeClosedSet& sce, const TailSpec& t,
                                       const Rational& eps, Fuel& fuel) {
  return run_with_fuel(fuel, [&](Fuel& f) -> Outcome<CutResult> {
    StageLabel label(f, "cut_endpoint");
    if (!(eps > 0)) throw ContractViolation("cut_endpoint: eps must be positive");
    auto br = bracket_tail(s, sce, t, eps, f);
    if (!br) return Timeout{br.stage()};
    CutResult r;
    r.bracket = *br;
    Rational g = detail::cut_gap(eps, br->l_hi, br->hi);
    r.tau_t = br->hi - g;
    r.delta = g / 4;
    Point near_x = t.at(r.tau_t + r.delta), near_v = t.at(r.tau_t - r.delta);
    Chart chart(PolylinePath({near_x, near_v}), 0, 1);
    std::vector<Capsule> others = t.others;
    others.push_back({t.v, near_v, 0, false});
    others.push_back({near_x, t.c, 0, false});
    auto nb = computable_neighbourhood(s, chart, others, f);
    if (!nb) return Timeout{nb.stage()};
    r.nb = *nb;
    Rational clear = sqrt_lower(detail::clearance2_segment(t.others, t.at(r.tau_t), t.c), 30);
    Rational rho_m = rmin(r.delta * br->l_lo / 8, clear / 2);
    PolylinePath cover({t.at(r.tau_t + r.delta / 4), t.at(br->hi)});
    for (auto& p : cover.sample(0, 1, rho_m / 4)) r.m.balls.emplace_back(std::move(p), rho_m);
    r.s_new = union_sets(subtract_union(s, r.m), semicomputable_of(nb->n));
    r.z = nb->a;
    r.removed_diam_upper = (br->hi - r.tau_t + r.delta) * br->l_hi;
    r.kept_carrier = polyline_set(PolylinePath({t.v, t.at(r.tau_t)}), 0, 1);
    return r;
  });
}

// ---------------------------------------------------------------------------
// Graph approximation

struct CutRecord {
  std::string edge;
  std::string end;  // "start" or "end"
  std::string case_tag;
  Rational tau_lo, tau_hi, tau_t, delta, l_hi;
  Rational removed_diam_upper;
  std::size_t chain_links = 0;  // links of l_0
};

struct EdgeResult {
  std::string id;
  EdgeKind kind = EdgeKind::Arc;
  std::string case_tag;
  ComputableCompactSet set;  // the arc A', or a ray A' inside the window
  std::optional<ComputablePoint> start, end;
  bool start_cut = false, end_cut = false;
};

struct GraphApproxReport {
  std::string fixture;
  Rational eps;
  Rational window;  // 0 without rays
  bool windowed = false;
  std::vector<EdgeResult> edges;
  std::vector<CutRecord> cuts;
  Rational hausdorff_upper;  // d_H(S, T) <= this (inside the window for rays)
  bool certified = false;    // hausdorff_upper < eps
  bool t_equals_s = false;
  std::vector<std::shared_ptr<ChainSequence>> sequences;
  std::uint64_t fuel_used = 0;

  /// Fuel of the main run plus every chain sequence so far.
  std::uint64_t total_fuel() const {
    std::uint64_t n = fuel_used;
    for (const auto& s : sequences) n += s->fuel().used();
    return n;
  }
};

namespace detail {

inline ComputableCompactSet union_of_sets(std::size_t dim, std::vector<ComputableCompactSet> parts) {
  return ComputableCompactSet(dim, [parts](unsigned k) {
    std::vector<Point> out;
    for (const auto& p : parts) {
      const auto& a = p.approx(k);
      out.insert(out.end(), a.begin(), a.end());
    }
    return out;
  });
}

/// The largest t with p + t d inside [-R, R]^n, for p inside the window.
inline Rational ray_exit(const Point& p, const Point& d, const Rational& window) {
  std::optional<Rational> best;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (d[i] == 0) continue;
    Rational t = ((d[i] > 0 ? window : -window) - p[i]) / d[i];
    if (!best || t < *best) best = t;
  }
  return best ? *best : Rational(0);
}

inline bool in_window(const Point& p, const Rational& window) {
  for (const auto& x : p)
    if (x < -window || x > window) return false;
  return true;
}

}  // namespace detail

/// Cuts every hidden endpoint, edge by edge (an arc's end before its start),
/// each cut running on the set left by the previous ones. Rays are
/// represented inside the window [-R, R]^n.
inline Outcome<GraphApproxReport> approximate_graph(const GraphFixture& fx, const Rational& eps, Fuel& fuel,
                                                    const Rational& window = 0) {
  return run_with_fuel(fuel, [&](Fuel& f) -> Outcome<GraphApproxReport> {
    StageLabel label(f, "approximate_graph");
    if (!(eps > 0)) throw ContractViolation("approximate_graph: eps must be positive");
    if (fx.has_rays() && !(window > 0)) throw ContractViolation("approximate_graph: rays need a positive window");
    GraphApproxReport rep;
    rep.fixture = fx.name;
    rep.eps = eps;
    rep.windowed = fx.has_rays();
    rep.window = rep.windowed ? window : Rational(0);
    rep.hausdorff_upper = 0;
    SemicomputableSet current = fixture_semicomputable(fx);
    CeClosedSet sce = fixture_ce(fx);
    for (const auto& e : fx.edges) {
      if (e.is_ray() && e.hidden_end) throw ContractViolation("approximate_graph: a ray has no far endpoint");
      EdgeResult er;
      er.id = e.id;
      er.kind = e.kind;
      int hidden = (e.hidden_start ? 1 : 0) + (e.hidden_end ? 1 : 0);
      er.case_tag = e.is_ray() ? (hidden ? "v" : "iv") : (hidden == 0 ? "i" : hidden == 1 ? "ii" : "iii");
      std::vector<ComputableCompactSet> parts;
      if (e.points.size() >= 2) {
        PolylinePath path(e.points);
        parts.push_back(polyline_set(path, 0, path.max_param()));
      } else {
        parts.push_back(ComputableCompactSet::finite(e.points));
      }
      if (e.is_ray() && detail::in_window(e.points.back(), rep.window)) {
        Rational t = detail::ray_exit(e.points.back(), e.direction, rep.window);
        if (t > 0) parts.push_back(polyline_set(PolylinePath({e.points.back(), add(e.points.back(), scale(e.direction, t))}), 0, 1));
      }
      if (!e.hidden_start) er.start = ComputablePoint::constant(e.points.front());
      if (!e.hidden_end && !e.is_ray()) er.end = ComputablePoint::constant(e.points.back());
      for (bool at_start : {false, true}) {
        if (!(at_start ? e.hidden_start : e.hidden_end)) continue;
        auto cut = cut_endpoint(current, sce, tail_spec(fx, e.id, at_start), eps, f);
        if (!cut) return Timeout{cut.stage()};
        current = cut->s_new;
        parts.push_back(cut->nb.n);
        parts.push_back(cut->kept_carrier);
        (at_start ? er.start : er.end) = cut->z;
        (at_start ? er.start_cut : er.end_cut) = true;
        rep.sequences.push_back(cut->nb.seq);
        CutRecord rec{e.id, at_start ? "start" : "end", er.case_tag, cut->bracket.lo, cut->bracket.hi,
                      cut->tau_t, cut->delta, cut->bracket.l_hi, cut->removed_diam_upper,
                      cut->nb.seq->generated_stage(0).l.size()};
        rep.hausdorff_upper = rmax(rep.hausdorff_upper, rec.removed_diam_upper);
        rep.cuts.push_back(std::move(rec));
      }
      er.set = detail::union_of_sets(fx.dim, std::move(parts));
      rep.edges.push_back(std::move(er));
    }
    rep.t_equals_s = rep.cuts.empty();
    rep.certified = rep.hausdorff_upper < eps;
    rep.fuel_used = f.used();
    return rep;
  });
}

}  // namespace semigraph
