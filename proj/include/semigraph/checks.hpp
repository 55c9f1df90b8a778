#pragma once

// Property suites run by `sgapprox check` against a fixture. They read the
// fixture's ground truth through the harness channel and never report
// timings, so a suite's output depends only on its inputs.

#include "semigraph/approx.hpp"
#include "semigraph/fixture.hpp"

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace semigraph {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 20240601;
  unsigned samples = 200;           // random pairs / queries per property
  unsigned stages = 4;              // chain stages examined
  Rational eps = Rational(1, 16);   // cut radius
  Rational window = 8;              // used for fixtures with rays
  std::uint64_t fuel = 20'000'000'000ull;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"formal", "chains", "sets", "approx", "all"};
  return names;
}

namespace checks {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  std::uint64_t below(std::uint64_t n) { return g_() % n; }
  Rational grid(const Rational& lo, const Rational& hi, long den) {
    Rational span = (hi - lo) * den;
    Natural steps = span.get_num() / span.get_den();
    std::uint64_t k = below(steps.get_ui() + 1);
    return lo + Rational(static_cast<long>(k), den);
  }

private:
  std::mt19937_64 g_;
};

/// Exact points of the closed ball: the center and rational points of the
/// boundary circles in the coordinate planes.
inline std::vector<Point> ball_samples(const Ball& b, unsigned per_plane = 8) {
  std::vector<Point> out{b.center};
  std::size_t d = b.dim();
  if (d == 1) {
    out.push_back({b.center[0] - b.radius});
    out.push_back({b.center[0] + b.radius});
    return out;
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      for (unsigned k = 0; k < per_plane; ++k) {
        // t = tan(theta/2) runs over 0, 1/2, 1, 2, ... and their negatives.
        Rational t = k == 0 ? Rational(0) : (k % 2 ? Rational(static_cast<long>((k + 1) / 2), 2) : -Rational(static_cast<long>(k / 2), 1));
        Rational den = 1 + t * t;
        for (int s : {1, -1}) {
          Point p = b.center;
          p[i] += s * b.radius * (1 - t * t) / den;
          p[j] += s * b.radius * 2 * t / den;
          out.push_back(std::move(p));
        }
      }
  return out;
}

inline std::vector<Point> union_samples(const UnionCode& u, unsigned per_plane = 8) {
  std::vector<Point> out;
  for (const auto& b : u.balls) {
    auto s = ball_samples(b, per_plane);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

inline bool in_closed(const UnionCode& u, const Point& p) {
  for (const auto& b : u.balls)
    if (dist2(p, b.center) <= b.radius * b.radius) return true;
  return false;
}

inline bool in_open(const UnionCode& u, const Point& p) {
  for (const auto& b : u.balls)
    if (dist2(p, b.center) < b.radius * b.radius) return true;
  return false;
}

struct Region {
  Point lo, hi;
};

/// The box spanned by the fixture's explicit points, grown by 1/2.
inline Region fixture_region(const GraphFixture& fx) {
  Region r{fx.edges.front().points.front(), fx.edges.front().points.front()};
  auto grow = [&](const Point& p) {
    for (std::size_t i = 0; i < p.size(); ++i) r.lo[i] = rmin(r.lo[i], p[i]), r.hi[i] = rmax(r.hi[i], p[i]);
  };
  for (const auto& e : fx.edges) {
    for (const auto& p : e.points) grow(p);
    if (e.hidden_start) grow(e.hidden_start->carrier);
    if (e.hidden_end) grow(e.hidden_end->carrier);
  }
  for (std::size_t i = 0; i < r.lo.size(); ++i) r.lo[i] -= Rational(1, 2), r.hi[i] += Rational(1, 2);
  return r;
}

inline Ball random_ball(Rng& rng, const Region& reg, long max_r32 = 16) {
  Point c(reg.lo.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = rng.grid(reg.lo[i], reg.hi[i], 16);
  return Ball(std::move(c), Rational(static_cast<long>(rng.below(max_r32) + 1), 32));
}

inline UnionCode random_union(Rng& rng, const Region& reg, unsigned max_balls = 3) {
  UnionCode u;
  unsigned n = static_cast<unsigned>(rng.below(max_balls)) + 1;
  for (unsigned i = 0; i < n; ++i) u.balls.push_back(random_ball(rng, reg));
  return u;
}

/// A union likely to contain u formally: each ball grown and nudged.
inline UnionCode grown_union(Rng& rng, const UnionCode& u) {
  UnionCode g;
  for (const auto& b : u.balls) {
    Point c = b.center;
    c[rng.below(c.size())] += Rational(static_cast<long>(rng.below(5)) - 2, 64);
    g.balls.emplace_back(std::move(c), b.radius + Rational(static_cast<long>(rng.below(4)), 32));
  }
  return g;
}

inline std::string ratio(std::uint64_t bad, std::uint64_t total, const char* what) {
  std::ostringstream o;
  o << bad << " violations in " << total << " " << what;
  return o.str();
}

/// The chart used by the chain and approx suites: the fixture's first chart,
/// or the middle third of the first arc's polyline.
inline std::optional<ChartSpec> default_chart(const GraphFixture& fx) {
  if (!fx.charts.empty()) return fx.charts.front();
  for (const auto& e : fx.edges) {
    if (e.points.size() < 2) continue;
    Rational n(static_cast<long>(e.points.size() - 1));
    return ChartSpec{"auto", e.id, n / 3, 2 * n / 3};
  }
  return std::nullopt;
}

inline Outcome<Neighbourhood> chart_neighbourhood(const GraphFixture& fx, const ChartSpec& spec, Fuel& fuel) {
  Chart f = fixture_chart(fx, spec);
  auto others = chart_others(fx, spec.edge, rmin(spec.from, spec.to), rmax(spec.from, spec.to));
  return computable_neighbourhood(fixture_semicomputable(fx), f, others, fuel, spec.t_a, spec.t_b);
}

// ---------------------------------------------------------------------------

inline std::vector<CheckResult> formal_suite(const GraphFixture& fx, const CheckOptions& opt) {
  std::vector<CheckResult> out;
  Rng rng(opt.seed);
  Region reg = fixture_region(fx);
  std::uint64_t disjoint = 0, disjoint_bad = 0, contained = 0, contained_bad = 0, pairs = 0, diam_bad = 0;
  for (unsigned t = 0; t < opt.samples; ++t) {
    UnionCode a = random_union(rng, reg), b = random_union(rng, reg);
    if (f_disjoint_unions(a, b)) {
      ++disjoint;
      for (const auto& p : union_samples(a))
        if (in_closed(b, p)) ++disjoint_bad;
    }
    UnionCode g = grown_union(rng, a);
    if (f_contained_unions(a, g)) {
      ++contained;
      for (const auto& p : union_samples(a))
        if (!in_open(g, p)) ++contained_bad;
    }
    auto s = union_samples(a, 4);
    QuadExpr fd = fdiam(a).value();
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t y = x + 1; y < s.size(); ++y) {
        ++pairs;
        if (cmp_quad(QuadExpr::sqrt_of(dist2(s[x], s[y])), fd) == Cmp::Greater) ++diam_bad;
      }
  }
  out.push_back({"formal", "disjoint_soundness", disjoint_bad == 0,
                 ratio(disjoint_bad, disjoint, "formally disjoint pairs")});
  out.push_back({"formal", "containment_soundness", contained_bad == 0,
                 ratio(contained_bad, contained, "formally contained pairs")});
  out.push_back({"formal", "fdiam_upper_bound", diam_bad == 0, ratio(diam_bad, pairs, "sampled point pairs")});

  // fdiam(j) < 4 eps + diam K for separators of the fixture's polylines.
  std::uint64_t yes = 0, sep_diam_bad = 0;
  Fuel fuel(opt.fuel);
  for (const auto& e : fx.edges) {
    if (e.points.size() < 2) continue;
    PolylinePath path(e.points);
    auto k = polyline_set(path, 0, path.max_param());
    for (Rational eps : {Rational(1, 4), Rational(1, 8), Rational(1, 16)}) {
      auto j = separator_search(k, eps, fuel);
      if (!j || subset_eps_semidecide(k, eps, *j, fuel) != Semi::Yes) continue;
      ++yes;
      if (fdiam_cmp(*j, 4 * eps + k.diam_upper()) != Bound::Less) ++sep_diam_bad;
    }
  }
  out.push_back({"formal", "subset_eps_diameter", yes > 0 && sep_diam_bad == 0, ratio(sep_diam_bad, yes, "YES answers")});
  return out;
}

inline std::vector<CheckResult> chains_suite(const GraphFixture& fx, const CheckOptions& opt) {
  std::vector<CheckResult> out;
  auto spec = default_chart(fx);
  if (!spec) {
    out.push_back({"chains", "chart", false, "fixture has no arc with a polyline"});
    return out;
  }
  Fuel fuel(opt.fuel);
  auto nb = chart_neighbourhood(fx, *spec, fuel);
  if (!nb) {
    out.push_back({"chains", "neighbourhood", false, "TIMEOUT at " + nb.stage()});
    return out;
  }
  auto& seq = *nb->seq;
  unsigned last = std::min(opt.stages, 3u);
  try {
    seq.stage(last);
  } catch (const FuelExhausted& e) {
    out.push_back({"chains", "stages", false, "TIMEOUT at " + e.stage});
    return out;
  }
  Rng rng(opt.seed + 1);
  std::uint64_t formal_bad = 0, refine_bad = 0, witness_bad = 0, interp = 0, interp_bad = 0, hull_pairs = 0,
                hull_bad = 0;
  for (unsigned n = 0; n <= last; ++n) {
    const auto& st = seq.generated_stage(n);
    FamilyCode full = detail::full_chain(st.p, st.l, st.q);
    if (!is_formal_chain(full)) ++formal_bad;
    // Nonadjacent closed links share no sampled point.
    for (unsigned t = 0; t < 20 && full.size() > 2; ++t) {
      std::size_t u = rng.below(full.size() - 2);
      std::size_t v = u + 2 + rng.below(full.size() - u - 2);
      const auto& bu = full.links[u].balls[rng.below(full.links[u].size())];
      ++hull_pairs;
      for (const auto& p : ball_samples(bu))
        if (in_closed(full.links[v], p)) ++hull_bad;
    }
    if (n == 0) continue;
    const auto& prev = seq.generated_stage(n - 1);
    if (!strongly_refines(st.l, prev.l)) ++refine_bad;
    auto w = refinement_witness(st.l, prev.l);
    if (!w) {
      ++witness_bad;
      continue;
    }
    // Every coarse index strictly between the images of two fine links is
    // hit strictly between them.
    for (std::size_t p = 0; p < w->size(); ++p)
      for (std::size_t q = p + 1; q < w->size(); ++q) {
        std::size_t i = (*w)[p], j = (*w)[q];
        if (j < i + 2) continue;
        std::size_t k = i + 1 + rng.below(j - i - 1);
        ++interp;
        try {
          std::size_t r = find_intermediate_link(*w, p, q, i, k, j);
          if (!(p < r && r < q && (*w)[r] == k)) ++interp_bad;
        } catch (const ContractViolation&) {
          ++interp_bad;
        }
      }
  }
  out.push_back({"chains", "formal_chain", formal_bad == 0, ratio(formal_bad, last + 1, "stages")});
  out.push_back({"chains", "closed_links_quasichain", hull_bad == 0, ratio(hull_bad, hull_pairs, "link pairs")});
  out.push_back({"chains", "strong_refinement", refine_bad == 0, ratio(refine_bad, last, "consecutive stages")});
  out.push_back({"chains", "refinement_witness", witness_bad == 0, ratio(witness_bad, last, "consecutive stages")});
  out.push_back({"chains", "intermediate_link", interp_bad == 0, ratio(interp_bad, interp, "queries")});
  return out;
}

inline std::vector<CheckResult> sets_suite(const GraphFixture& fx, const CheckOptions& opt) {
  std::vector<CheckResult> out;
  Rng rng(opt.seed + 2);
  Region reg = fixture_region(fx);
  auto segs = truth::segments(fx);
  auto ce = fixture_ce(fx);
  auto sc = fixture_semicomputable(fx);
  Fuel fuel(opt.fuel);

  std::uint64_t hits = 0, hits_bad = 0;
  for (unsigned t = 0; t < opt.samples; ++t) {
    Ball b = random_ball(rng, reg, 8);
    for (unsigned st = 0; st <= 6; ++st)
      if (ce.hits(b, st, fuel)) {
        ++hits;
        if (!(truth::dist2_to_set(segs, b.center) < b.radius * b.radius)) ++hits_bad;
        break;
      }
  }
  out.push_back({"sets", "hits_soundness", hits_bad == 0, ratio(hits_bad, hits, "emitted hits")});

  // Omega queries: J covers truth samples near the ball with a few balls left out.
  Rational h(1, 256);
  auto dense = truth::samples(segs, h, fx.has_rays() ? opt.window : Rational(0));
  auto omega_check = [&](const SemicomputableSet& s, const std::function<bool(const Point&)>& in_s,
                         std::uint64_t& emitted, std::uint64_t& bad) {
    for (unsigned t = 0; t < opt.samples / 4; ++t) {
      Ball b = random_ball(rng, reg, 8);
      UnionCode j;
      Rational r(1, 32);
      for (std::size_t i = 0; i < dense.size(); i += 4) {
        if (!dist_lt(dense[i], b.center, b.radius + 2 * r)) continue;
        if (rng.below(16) == 0) continue;
        j.balls.emplace_back(dense[i], r);
      }
      if (j.empty()) j.balls.emplace_back(b.center, r);
      for (unsigned st = 0; st <= 6; ++st)
        if (s.omega(b, j, st, fuel)) {
          ++emitted;
          for (const auto& p : dense)
            if (in_s(p) && dist2(p, b.center) <= b.radius * b.radius && !in_open(j, p)) {
              ++bad;
              break;
            }
          break;
        }
    }
  };
  std::uint64_t om = 0, om_bad = 0;
  omega_check(sc, [](const Point&) { return true; }, om, om_bad);
  out.push_back({"sets", "omega_soundness", om_bad == 0, ratio(om_bad, om, "emitted pairs")});

  // S \ J_m for a ball around the middle of the first known segment.
  const Edge& e0 = fx.edges.front();
  Point mid = e0.points.size() >= 2 ? lerp(e0.points[0], e0.points[1], Rational(1, 2)) : e0.points.front();
  UnionCode m;
  m.balls.emplace_back(mid, Rational(1, 16));
  std::uint64_t sm = 0, sm_bad = 0;
  omega_check(subtract_union(sc, m), [&](const Point& p) { return !in_open(m, p); }, sm, sm_bad);
  out.push_back({"sets", "subtract_union_soundness", sm_bad == 0, ratio(sm_bad, sm, "emitted pairs")});

  if (!fx.has_rays()) {
    auto ssc = fixture_semicompact(fx);
    std::uint64_t ks = 0, k_bad = 0;
    std::vector<Point> prev;
    unsigned kmax = std::min(opt.stages + 2, 6u);
    auto grid = truth::samples(segs, pow2(-10));
    for (unsigned k = 0; k <= kmax; ++k) {
      auto p = approximate(ce, ssc, k, fuel);
      ++ks;
      if (!p) {
        ++k_bad;
        continue;
      }
      Rational tol = pow2(-static_cast<long>(k));
      bool ok = true;
      for (const auto& x : *p) ok = ok && truth::dist2_to_set(segs, x) < tol * tol;
      // The grid lies in S and is 2^-10-dense in it.
      ok = ok && hausdorff_lt(grid, *p, tol + pow2(-10));
      if (!prev.empty()) ok = ok && hausdorff_lt(prev, *p, tol * 2 + tol);
      if (!ok) ++k_bad;
      prev = std::move(*p);
    }
    out.push_back({"sets", "approximate_hausdorff", k_bad == 0, ratio(k_bad, ks, "precisions")});
  } else {
    out.push_back({"sets", "approximate_hausdorff", true, "skipped: S is unbounded"});
  }

  std::uint64_t sep = 0, sep_bad = 0;
  for (const auto& e : fx.edges) {
    if (e.points.size() < 2) continue;
    PolylinePath path(e.points);
    auto k = polyline_set(path, 0, path.max_param());
    ++sep;
    auto j = separator_search(k, Rational(1, 8), fuel);
    if (!j || subset_eps_semidecide(k, Rational(1, 8), *j, fuel) != Semi::Yes) ++sep_bad;
  }
  out.push_back({"sets", "separator_search", sep_bad == 0, ratio(sep_bad, sep, "edges")});
  return out;
}

inline std::vector<CheckResult> approx_suite(const GraphFixture& fx, const CheckOptions& opt) {
  std::vector<CheckResult> out;
  auto segs = truth::segments(fx);
  auto spec = default_chart(fx);
  if (spec) {
    Fuel fuel(opt.fuel);
    auto nb = chart_neighbourhood(fx, *spec, fuel);
    if (!nb) {
      out.push_back({"approx", "neighbourhood", false, "TIMEOUT at " + nb.stage()});
    } else {
      auto& seq = *nb->seq;
      std::uint64_t mesh_bad = 0, refine_bad = 0, gamma_bad = 0, in_s_bad = 0, x_bad = 0, cauchy_bad = 0;
      unsigned done = 0;
      std::string timeout;
      Point x = fixture_chart(fx, *spec).eval(0);
      Fuel check_fuel(opt.fuel);
      for (unsigned n = 0; n <= opt.stages; ++n) {
        try {
          seq.stage(n);
        } catch (const FuelExhausted& e) {
          timeout = e.stage;
          break;
        }
        ++done;
        const auto& st = seq.generated_stage(n);
        Rational tol = pow2(-static_cast<long>(n));
        if (fmesh_cmp(st.l, tol) != Bound::Less) ++mesh_bad;
        auto pts = neighbourhood_approx(seq, n);
        bool in_s = true, near_x = false;
        for (const auto& p : pts) {
          in_s = in_s && truth::dist2_to_set(segs, p) < tol * tol;
          near_x = near_x || dist_lt(p, x, tol);
        }
        if (!in_s) ++in_s_bad;
        if (!near_x) ++x_bad;
        if (n == 0) continue;
        const auto& prev = seq.generated_stage(n - 1);
        if (!strongly_refines(st.l, prev.l)) ++refine_bad;
        if (!check_gamma(seq.context(), prev, st, check_fuel).all()) ++gamma_bad;
        Rational c = 2 * tol + tol;
        if (!dist_lt(st.l.first().first_center(), prev.l.first().first_center(), c) ||
            !dist_lt(st.l.last().first_center(), prev.l.last().first_center(), c))
          ++cauchy_bad;
      }
      unsigned want = opt.stages + 1;
      std::string of = std::to_string(done) + "/" + std::to_string(want) + " stages";
      out.push_back({"approx", "stages_generated", done == want, timeout.empty() ? of : of + ", TIMEOUT at " + timeout});
      out.push_back({"approx", "mesh_decay", done > 0 && mesh_bad == 0, ratio(mesh_bad, done, "stages")});
      out.push_back({"approx", "strong_refinement", refine_bad == 0, ratio(refine_bad, done ? done - 1 : 0, "stage pairs")});
      out.push_back({"approx", "gamma", gamma_bad == 0, ratio(gamma_bad, done ? done - 1 : 0, "stage pairs")});
      out.push_back({"approx", "neighbourhood_in_s", in_s_bad == 0, ratio(in_s_bad, done, "stages")});
      out.push_back({"approx", "neighbourhood_contains_x", x_bad == 0, ratio(x_bad, done, "stages")});
      out.push_back({"approx", "endpoint_cauchy", cauchy_bad == 0, ratio(cauchy_bad, done ? done - 1 : 0, "stage pairs")});
    }
  }

  // Every hidden endpoint is cut inside B(x*, eps).
  std::uint64_t cuts = 0, cut_bad = 0;
  for (const auto& e : fx.edges)
    for (bool at_start : {false, true}) {
      const auto& h = at_start ? e.hidden_start : e.hidden_end;
      if (!h) continue;
      ++cuts;
      Fuel fuel(opt.fuel);
      auto cut = cut_endpoint(fixture_semicomputable(fx), fixture_ce(fx), tail_spec(fx, e.id, at_start), opt.eps, fuel);
      if (!cut) {
        ++cut_bad;
        continue;
      }
      Point xs = truth::endpoint(*h);
      unsigned k = 12;
      Point z = point_approx(cut->z, k);
      // f([0, a]) is the segment from x* to a, with |a - z_k| < 2^-k.
      if (!dist_plus_lt(z, xs, pow2(-static_cast<long>(k)), opt.eps)) ++cut_bad;
    }
  out.push_back({"approx", "cut_within_eps", cut_bad == 0, ratio(cut_bad, cuts, "hidden endpoints")});

  Fuel fuel(opt.fuel);
  auto rep = approximate_graph(fx, opt.eps, fuel, fx.has_rays() ? opt.window : Rational(0));
  if (!rep) {
    out.push_back({"approx", "graph_certificate", false, "TIMEOUT at " + rep.stage()});
  } else {
    std::ostringstream d;
    d << "hausdorff_upper " << to_string(rep->hausdorff_upper) << " vs eps " << to_string(opt.eps) << ", "
      << rep->cuts.size() << " cuts";
    out.push_back({"approx", "graph_certificate", rep->certified, d.str()});
  }
  return out;
}

}  // namespace checks

/// Runs one suite, or all of them; throws std::invalid_argument for an
/// unknown name.
inline std::vector<CheckResult> run_suite(const GraphFixture& fx, const std::string& suite, const CheckOptions& opt = {}) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw std::invalid_argument("unknown suite '" + suite + "' (expected formal, chains, sets, approx or all)");
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> r) { out.insert(out.end(), r.begin(), r.end()); };
  if (suite == "formal" || suite == "all") append(checks::formal_suite(fx, opt));
  if (suite == "chains" || suite == "all") append(checks::chains_suite(fx, opt));
  if (suite == "sets" || suite == "all") append(checks::sets_suite(fx, opt));
  if (suite == "approx" || suite == "all") append(checks::approx_suite(fx, opt));
  return out;
}

inline std::string format_results(const std::vector<CheckResult>& rs) {
  std::ostringstream o;
  for (const auto& r : rs)
    o << (r.passed ? "PASS " : "FAIL ") << r.suite << "." << r.name << ": " << r.detail << "\n";
  return o.str();
}

}  // namespace semigraph
