#include "semigraph/approx.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace semigraph;

namespace {

GraphFixture load(const std::string& name) { return parse_fixture(std::string(SEMIGRAPH_FIXTURES) + "/" + name + ".json"); }

Point pt(Rational x, Rational y) { return {x, y}; }

std::vector<oracle::Segment> truth_segments(const GraphFixture& fx) {
  std::vector<oracle::Segment> out;
  for (const auto& c : truth::segments(fx)) out.push_back({c.a, c.b});
  return out;
}

bool in_open_union(const UnionCode& u, const Point& p) {
  for (const auto& b : u.balls)
    if (oracle::d2(p, b.center) < b.radius * b.radius) return true;
  return false;
}

/// Balls of radius r centered every r/2 along [a, b].
UnionCode strip(const Point& a, const Point& b, const Rational& r) {
  UnionCode u;
  for (auto& p : PolylinePath({a, b}).sample(0, 1, r / 2)) u.balls.emplace_back(p, r);
  return u;
}

ChartSpec chart_spec(const GraphFixture& fx) {
  if (!fx.charts.empty()) return fx.charts.front();
  Rational n(static_cast<long>(fx.edges.front().points.size() - 1));
  return ChartSpec{"mid", fx.edges.front().id, n / 3, 2 * n / 3};
}

struct Setup {
  Chart f;
  std::vector<Capsule> others;
  ChartSpec spec;
};

Setup setup(const GraphFixture& fx) {
  auto spec = chart_spec(fx);
  return {fixture_chart(fx, spec), chart_others(fx, spec.edge, rmin(spec.from, spec.to), rmax(spec.from, spec.to)),
          spec};
}

// (a) of the inflation: every ball has radius < eps and meets K; K lies in
// the union (checked on a dense sample of K).
void expect_subset_eps(const ComputableCompactSet& k, const UnionCode& j, const Rational& eps,
                       const std::vector<oracle::Segment>& k_segs) {
  for (const auto& b : j.balls) {
    EXPECT_LT(b.radius, eps);
    EXPECT_LT(oracle::set_d2(k_segs, b.center), b.radius * b.radius);
  }
  for (const auto& p : k.approx(10)) EXPECT_TRUE(in_open_union(j, p));
}

// The seed-stage bounds on l_0, from their definitions: fmesh < eps/2 and the
// anchors within eps/2 of the end links.
void expect_seed_bounds(const NeighbourhoodContext& ctx, const ChainStage& st) {
  auto m = oracle::fmesh_enclosure(st.l.links);
  EXPECT_LT(m.second, Rational(ctx.eps / 2).get_d());
  auto near = [&](const Point& x, const UnionCode& u) {
    for (const auto& b : u.balls) {
      Rational reach = b.radius + ctx.eps / 2;
      if (oracle::d2(x, b.center) < reach * reach) return true;
    }
    return false;
  };
  EXPECT_TRUE(near(ctx.f.eval(ctx.t_a), st.l.first()));
  EXPECT_TRUE(near(ctx.f.eval(ctx.t_b), st.l.last()));
}

// Link containment, mesh halving and end links from definitions; Omega
// membership through omega_semidecide.
void expect_gamma(const NeighbourhoodContext& ctx, const ChainStage& cur, const ChainStage& next) {
  auto w = oracle::containing_links(next.l.links, cur.l.links);
  for (long v : w) EXPECT_GE(v, 0);
  EXPECT_TRUE(oracle::inside_union(next.l.first(), cur.l.first()));
  EXPECT_TRUE(oracle::inside_union(next.l.last(), cur.l.last()));
  auto fine = oracle::fmesh_enclosure(next.l.links), coarse = oracle::fmesh_enclosure(cur.l.links);
  EXPECT_LT(2 * fine.second, coarse.first);
  std::vector<UnionCode> full{next.p};
  full.insert(full.end(), next.l.links.begin(), next.l.links.end());
  full.push_back(next.q);
  EXPECT_TRUE(oracle::formal_chain(full));
  Fuel fuel(2'000'000'000);
  EXPECT_EQ(omega_semidecide(ctx, next.p, next.l, next.q, fuel), Semi::Yes);
}

Outcome<NeighbourhoodContext> context_for(const GraphFixture& fx, Fuel& fuel) {
  auto su = setup(fx);
  return build_context(fixture_semicomputable(fx), su.f, su.others, su.spec.t_a, su.spec.t_b, fuel);
}

double hausdorff_to(const std::vector<Point>& pts, const std::vector<oracle::Segment>& segs, double h) {
  auto g = oracle::grid_samples(segs, h);
  auto p = oracle::to_doubles(pts);
  return std::max(oracle::directed_hausdorff(g, p), oracle::directed_hausdorff(p, g));
}

}  // namespace

// ---------------------------------------------------------------------------
// inflate_quasichain

TEST(InflateQuasichain, TwoTouchingSegments) {
  std::vector<oracle::Segment> segs{{pt(0, 0), pt(1, 0)}, {pt(1, 0), pt(2, 0)}};
  std::vector<ComputableCompactSet> k;
  for (const auto& s : segs) k.push_back(polyline_set(PolylinePath({s.a, s.b}), 0, 1));
  Fuel fuel(100'000'000);
  auto r = inflate_quasichain(k, {}, 1, fuel);
  ASSERT_TRUE(r) << r.stage();
  expect_subset_eps(k[0], r->p, 1, {segs[0]});
  expect_subset_eps(k[1], r->q, 1, {segs[1]});
  EXPECT_TRUE(oracle::formal_chain(std::vector<UnionCode>{r->p, r->q}));
}

TEST(InflateQuasichain, FourSegmentsFormAFormalChain) {
  std::vector<oracle::Segment> segs;
  for (long i = 0; i < 4; ++i) segs.push_back({pt(i, 0), pt(i + 1, 0)});
  std::vector<ComputableCompactSet> k;
  for (const auto& s : segs) k.push_back(polyline_set(PolylinePath({s.a, s.b}), 0, 1));
  Fuel fuel(100'000'000);
  auto r = inflate_quasichain(k, {}, 1, fuel);
  ASSERT_TRUE(r) << r.stage();
  std::vector<UnionCode> full{r->p};
  full.insert(full.end(), r->l.links.begin(), r->l.links.end());
  full.push_back(r->q);
  ASSERT_EQ(full.size(), 4u);
  for (std::size_t u = 0; u < 4; ++u) expect_subset_eps(k[u], full[u], 1, {segs[u]});
  EXPECT_TRUE(oracle::formal_chain(full));
}

TEST(InflateQuasichain, CodesInsideEnclosingUnion) {
  std::vector<oracle::Segment> segs{{pt(0, 0), pt(1, 0)}, {pt(1, 0), pt(2, 0)}, {pt(2, 0), pt(3, 0)}};
  std::vector<ComputableCompactSet> k;
  for (const auto& s : segs) k.push_back(polyline_set(PolylinePath({s.a, s.b}), 0, 1));
  UnionCode big({Ball(pt(Rational(3, 2), 0), 4)});
  Fuel fuel(100'000'000);
  auto r = inflate_quasichain(k, {big}, Rational(1, 2), fuel);
  ASSERT_TRUE(r) << r.stage();
  EXPECT_TRUE(oracle::inside_union(r->p, big));
  EXPECT_TRUE(oracle::inside_union(r->q, big));
  for (const auto& l : r->l.links) EXPECT_TRUE(oracle::inside_union(l, big));
}

TEST(InflateQuasichain, ZeroFuelTimesOut) {
  std::vector<ComputableCompactSet> k{polyline_set(PolylinePath({pt(0, 0), pt(1, 0)}), 0, 1),
                                      polyline_set(PolylinePath({pt(1, 0), pt(2, 0)}), 0, 1)};
  Fuel fuel(0);
  EXPECT_FALSE(inflate_quasichain(k, {}, 1, fuel));
}

// ---------------------------------------------------------------------------
// omega_semidecide on a hand-built triple for the straight arc. The chart is
// f(s) = ((s + 4)/8, 0); a~ = (1/4, 0), b~ = (3/4, 0).

namespace {

struct Triple {
  UnionCode p, q;
  FamilyCode l;
};

Triple straight_triple() {
  Rational r(1, 32);
  Triple t;
  t.p = strip(pt(Rational(-1, 16), 0), pt(Rational(5, 16), 0), r);
  std::vector<Rational> cuts{Rational(5, 16), Rational(7, 16), Rational(9, 16), Rational(11, 16)};
  for (std::size_t u = 0; u + 1 < cuts.size(); ++u) t.l.links.push_back(strip(pt(cuts[u], 0), pt(cuts[u + 1], 0), r));
  t.q = strip(pt(Rational(11, 16), 0), pt(Rational(17, 16), 0), r);
  return t;
}

}  // namespace

TEST(OmegaSemidecide, HandBuiltTripleIsAccepted) {
  auto fx = load("straight-arc");
  Fuel fuel(4'000'000'000);
  auto ctx = context_for(fx, fuel);
  ASSERT_TRUE(ctx) << ctx.stage();
  auto t = straight_triple();
  // The triple satisfies the Omega conditions by definition.
  std::vector<UnionCode> full{t.p};
  full.insert(full.end(), t.l.links.begin(), t.l.links.end());
  full.push_back(t.q);
  ASSERT_TRUE(oracle::formal_chain(full));
  ASSERT_TRUE(in_open_union(t.p, pt(Rational(1, 4), 0)));
  ASSERT_TRUE(in_open_union(t.q, pt(Rational(3, 4), 0)));
  Fuel f(1'000'000'000);
  EXPECT_EQ(omega_semidecide(*ctx, t.p, t.l, t.q, f), Semi::Yes);
}

TEST(OmegaSemidecide, OverlappingNonadjacentLinksAreRejected) {
  auto fx = load("straight-arc");
  Fuel fuel(4'000'000'000);
  auto ctx = context_for(fx, fuel);
  ASSERT_TRUE(ctx);
  auto t = straight_triple();
  t.l.links[0].balls.push_back(Ball(pt(Rational(11, 16), 0), Rational(1, 32)));
  std::vector<UnionCode> full{t.p};
  full.insert(full.end(), t.l.links.begin(), t.l.links.end());
  full.push_back(t.q);
  ASSERT_FALSE(oracle::formal_chain(full));
  Fuel f(1'000'000'000);
  EXPECT_EQ(omega_semidecide(*ctx, t.p, t.l, t.q, f), Semi::Timeout);
}

TEST(OmegaSemidecide, AnchorOutsidePIsRejected) {
  auto fx = load("straight-arc");
  Fuel fuel(4'000'000'000);
  auto ctx = context_for(fx, fuel);
  ASSERT_TRUE(ctx);
  auto t = straight_triple();
  // J_p ends at 3/16 + 1/32 < 1/4; the gap is closed by l's first link.
  t.p = strip(pt(Rational(-1, 16), 0), pt(Rational(3, 16), 0), Rational(1, 32));
  t.l.links[0] = strip(pt(Rational(3, 16), 0), pt(Rational(7, 16), 0), Rational(1, 32));
  ASSERT_FALSE(in_open_union(t.p, pt(Rational(1, 4), 0)));
  Fuel f(1'000'000'000);
  EXPECT_EQ(omega_semidecide(*ctx, t.p, t.l, t.q, f), Semi::Timeout);
}

// ---------------------------------------------------------------------------
// initial_chain and refine_chain

class ChainPipeline : public ::testing::TestWithParam<const char*> {};

TEST_P(ChainPipeline, InitialChainSatisfiesSeedBounds) {
  auto fx = load(GetParam());
  Fuel fuel(4'000'000'000);
  auto ctx = context_for(fx, fuel);
  ASSERT_TRUE(ctx) << ctx.stage();
  EXPECT_LT(ctx->eps, 1);
  auto l0 = initial_chain(*ctx, fuel);
  ASSERT_TRUE(l0) << l0.stage();
  expect_seed_bounds(*ctx, *l0);
  Fuel f(2'000'000'000);
  EXPECT_EQ(omega_semidecide(*ctx, l0->p, l0->l, l0->q, f), Semi::Yes);
}

TEST_P(ChainPipeline, RefineChainFiveTimes) {
  auto fx = load(GetParam());
  Fuel fuel(20'000'000'000);
  auto ctx = context_for(fx, fuel);
  ASSERT_TRUE(ctx) << ctx.stage();
  auto l0 = initial_chain(*ctx, fuel);
  ASSERT_TRUE(l0) << l0.stage();
  ChainStage cur = *l0;
  for (int n = 1; n <= 5; ++n) {
    auto next = refine_chain(*ctx, cur, fuel);
    ASSERT_TRUE(next) << n << " " << next.stage();
    if (n <= 3) expect_gamma(*ctx, cur, *next);
    cur = std::move(*next);
  }
  auto m0 = oracle::fmesh_enclosure(l0->l.links), m5 = oracle::fmesh_enclosure(cur.l.links);
  EXPECT_LT(m5.second, std::ldexp(m0.first, -5));
}

INSTANTIATE_TEST_SUITE_P(Fixtures, ChainPipeline, ::testing::Values("straight-arc", "sine-arc"),
                         [](const auto& info) { return std::string(info.param) == "straight-arc" ? "Straight" : "Sine"; });

TEST(InitialChain, ZeroFuelTimesOut) {
  auto fx = load("straight-arc");
  Fuel fuel(4'000'000'000);
  auto ctx = context_for(fx, fuel);
  ASSERT_TRUE(ctx);
  Fuel zero(0);
  EXPECT_FALSE(initial_chain(*ctx, zero));
}

TEST(RefineChain, ZeroFuelTimesOut) {
  auto fx = load("straight-arc");
  Fuel fuel(4'000'000'000);
  auto ctx = context_for(fx, fuel);
  ASSERT_TRUE(ctx);
  auto l0 = initial_chain(*ctx, fuel);
  ASSERT_TRUE(l0);
  Fuel zero(0);
  EXPECT_FALSE(refine_chain(*ctx, *l0, zero));
}

namespace {

/// Index of the grid piece [x_k, x_k+1] holding t, found by scanning the
/// grid x_k = -4 + 8k/n. Left-closed when left is true, else right-closed.
long piece_by_scan(const Rational& t, long n, bool left) {
  for (long k = 0; k < n; ++k) {
    Rational lo = -4 + Rational(8 * k, n), hi = -4 + Rational(8 * (k + 1), n);
    if (left ? (lo <= t && t < hi) : (lo < t && t <= hi)) return k;
  }
  return -1;
}

}  // namespace

// Pieces of parameter length below 1/2 separate the anchors: at least three
// pieces before t_a, after t_b, and between them.
TEST(AnchorPieces, IndicesMatchGridAndSeparate) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> num(1, 999);
  std::vector<Rational> tas{Rational(-5, 2) + Rational(1, 1000), Rational(-2), Rational(-3, 2) - Rational(1, 1000)};
  std::vector<Rational> tbs{Rational(3, 2) + Rational(1, 1000), Rational(2), Rational(5, 2) - Rational(1, 1000)};
  for (int r = 0; r < 40; ++r) {
    tas.push_back(Rational(-5, 2) + Rational(num(rng), 1000));
    tbs.push_back(Rational(3, 2) + Rational(num(rng), 1000));
  }
  for (long n = 17; n <= 96; ++n) {
    for (std::size_t k = 0; k < tas.size(); ++k) {
      auto [i, j] = detail::anchor_pieces(tas[k], tbs[k], n);
      ASSERT_EQ(i, piece_by_scan(tas[k], n, true)) << "n=" << n;
      ASSERT_EQ(j, piece_by_scan(tbs[k], n, false)) << "n=" << n;
      EXPECT_GT(i, 2);
      EXPECT_GT(n - 1 - j, 2);
      EXPECT_GT(j - i, 5);
      // |j - i| > 2|t_b - t_a| - 1
      EXPECT_GT(Rational(j - i), 2 * (tbs[k] - tas[k]) - 1);
    }
  }
  // Grid points themselves: t_a opens a piece, t_b closes one.
  EXPECT_EQ(detail::anchor_pieces(Rational(-2), Rational(2), 32), std::make_pair(8l, 23l));
}

TEST(BuildContext, ZeroFuelTimesOut) {
  auto fx = load("straight-arc");
  Fuel zero(0);
  EXPECT_FALSE(context_for(fx, zero));
}

// ---------------------------------------------------------------------------
// Neighbourhoods

class Neighbourhoods : public ::testing::TestWithParam<const char*> {};

TEST_P(Neighbourhoods, StagesApproximateASubarcThroughX) {
  auto fx = load(GetParam());
  auto su = setup(fx);
  auto segs = truth_segments(fx);
  Fuel fuel(20'000'000'000);
  auto nb = computable_neighbourhood(fixture_semicomputable(fx), su.f, su.others, fuel, su.spec.t_a, su.spec.t_b);
  ASSERT_TRUE(nb) << nb.stage();
  auto& seq = *nb->seq;
  Point x = su.f.eval(0);
  std::vector<Point> prev;
  for (unsigned k = 0; k <= 8; ++k) {
    const auto& pts = nb->n.approx(k);
    Rational e = pow2(-static_cast<long>(k));
    // x in N': some point within 2^-k (plus rounding slack of the grid).
    Rational best = -1;
    for (const auto& p : pts) {
      Rational d = oracle::d2(p, x);
      if (best < 0 || d < best) best = d;
    }
    EXPECT_LT(best, e * e) << k;
    // N' subset S: every point within 2^-k of S.
    for (const auto& p : pts) EXPECT_LT(oracle::set_d2(segs, p), e * e) << k;
    if (k > 0) {
      auto a = oracle::to_doubles(prev), b = oracle::to_doubles(pts);
      double d = std::max(oracle::directed_hausdorff(a, b), oracle::directed_hausdorff(b, a));
      EXPECT_LT(d, 2 * e.get_d() + e.get_d()) << k;
    }
    prev = pts;
  }
  // Stage k of the sequence: one first-ball center per link.
  for (std::size_t n = 0; n < seq.generated(); ++n)
    EXPECT_EQ(neighbourhood_approx(seq, n).size(), seq.generated_stage(n).l.size());
  EXPECT_THROW(neighbourhood_approx(seq, seq.generated() + 3), ContractViolation);
  // Stage 0 lies within 1 of the chart's arc.
  for (const auto& p : neighbourhood_approx(seq, 0)) EXPECT_LT(oracle::set_d2(segs, p), 1);
}

// a and b at precision 10: the true endpoint lies in S inside the closed first
// (last) link of every stage, so the sup of |z - y| over y in that clip bounds
// the error.
TEST_P(Neighbourhoods, EndpointsAreAccurateToTwoToMinusTen) {
  auto fx = load(GetParam());
  auto su = setup(fx);
  auto segs = truth_segments(fx);
  Fuel fuel(20'000'000'000);
  auto nb = computable_neighbourhood(fixture_semicomputable(fx), su.f, su.others, fuel, su.spec.t_a, su.spec.t_b);
  ASSERT_TRUE(nb) << nb.stage();
  auto& seq = *nb->seq;
  Point za = point_approx(nb->a, 10), zb = point_approx(nb->b, 10);
  std::size_t deep = seq.stage_for(10) + 1;
  const auto& st = seq.stage(deep);
  auto worst = [&](const UnionCode& link, const Point& z) {
    double w = -1;
    for (const auto& b : link.balls)
      for (const auto& g : segs) w = std::max(w, oracle::sup_dist_on_clip(g.a, g.b, b.center, b.radius, z));
    return w;
  };
  double ea = worst(st.l.first(), za), eb = worst(st.l.last(), zb);
  EXPECT_GE(ea, 0);
  EXPECT_GE(eb, 0);
  EXPECT_LT(ea, std::ldexp(1.0, -10));
  EXPECT_LT(eb, std::ldexp(1.0, -10));
}

INSTANTIATE_TEST_SUITE_P(Fixtures, Neighbourhoods, ::testing::Values("straight-arc", "sine-arc"),
                         [](const auto& info) { return std::string(info.param) == "straight-arc" ? "Straight" : "Sine"; });

// ---------------------------------------------------------------------------
// cut_endpoint

TEST(CutEndpoint, RemovedPieceIsInsideTheEpsBall) {
  auto fx = load("hidden-arc");
  Point xs = truth::endpoint(*fx.edge("e0").hidden_end);
  for (Rational eps : {Rational(1, 8), Rational(4)}) {
    Fuel fuel(20'000'000'000);
    auto cut = cut_endpoint(fixture_semicomputable(fx), fixture_ce(fx), tail_spec(fx, "e0", false), eps, fuel);
    ASSERT_TRUE(cut) << cut.stage();
    // f([0, a]) is the segment from a to x*; the ball is convex.
    Point z = point_approx(cut->z, 12);
    Rational e = pow2(-12);
    EXPECT_EQ(oracle::interval_compare(e, 1, oracle::d2(z, xs), eps, 0, 0), -1) << eps;
    // z lies on S.
    EXPECT_LT(oracle::set_d2(truth_segments(fx), z), e * e);
  }
}

TEST(CutEndpoint, NewSetAvoidsTheRemovedPiece) {
  auto fx = load("hidden-arc");
  Point xs = truth::endpoint(*fx.edge("e0").hidden_end);
  Fuel fuel(20'000'000'000);
  auto cut = cut_endpoint(fixture_semicomputable(fx), fixture_ce(fx), tail_spec(fx, "e0", false), Rational(1, 8), fuel);
  ASSERT_TRUE(cut) << cut.stage();
  Point z = point_approx(cut->z, 12);
  Rational len = oracle::d2(z, xs);
  ASSERT_GT(len, pow2(-16));
  // Points q of [z, x*] at least 2^-9 from z: a small ball there misses
  // S_new, so Omega eventually certifies it against a far tiny union.
  UnionCode far({Ball(pt(-9, -9), pow2(-20))});
  int probes = 0;
  for (long i = 1; i <= 8; ++i) {
    Point q = lerp(z, xs, Rational(i, 8));
    if (oracle::d2(q, z) < pow2(-18)) continue;
    ++probes;
    Ball b(q, pow2(-12));
    bool ok = false;
    Fuel f(2'000'000'000);
    for (unsigned s = 0; s <= 24 && !ok; ++s) ok = cut->s_new.omega(b, far, s, f);
    EXPECT_TRUE(ok) << i;
  }
  EXPECT_GT(probes, 4);
}

TEST(CutEndpoint, ZeroFuelTimesOut) {
  auto fx = load("hidden-arc");
  Fuel fuel(0);
  EXPECT_FALSE(cut_endpoint(fixture_semicomputable(fx), fixture_ce(fx), tail_spec(fx, "e0", false), Rational(1, 8), fuel));
}

// ---------------------------------------------------------------------------
// approximate_graph

TEST(ApproximateGraph, NoHiddenEndpointsGivesTEqualsS) {
  auto fx = load("straight-arc");
  Fuel fuel(1'000'000'000);
  auto rep = approximate_graph(fx, Rational(1, 16), fuel);
  ASSERT_TRUE(rep) << rep.stage();
  EXPECT_TRUE(rep->t_equals_s);
  EXPECT_TRUE(rep->cuts.empty());
  ASSERT_EQ(rep->edges.size(), 1u);
  EXPECT_EQ(rep->edges[0].case_tag, "i");
  EXPECT_EQ(point_approx(*rep->edges[0].start, 10), pt(0, 0));
  EXPECT_EQ(point_approx(*rep->edges[0].end, 10), pt(1, 0));
  EXPECT_LT(hausdorff_to(rep->edges[0].set.approx(8), truth_segments(fx), std::ldexp(1.0, -12)),
            std::ldexp(1.0, -8) + std::ldexp(1.0, -11));
}

TEST(ApproximateGraph, TriangleWithTail) {
  auto fx = load("triangle-with-tail");
  auto segs = truth_segments(fx);
  Fuel fuel(20'000'000'000);
  auto rep = approximate_graph(fx, Rational(1, 16), fuel);
  ASSERT_TRUE(rep) << rep.stage();
  ASSERT_EQ(rep->cuts.size(), 1u);
  EXPECT_EQ(rep->cuts[0].case_tag, "ii");
  EXPECT_EQ(rep->cuts[0].edge, "tail");
  EXPECT_TRUE(rep->certified);
  std::vector<Point> t;
  for (const auto& e : rep->edges) {
    const auto& a = e.set.approx(10);
    t.insert(t.end(), a.begin(), a.end());
  }
  // d_H(S, T) <= d_H(S, T_10) + 2^-10.
  double d = hausdorff_to(t, segs, std::ldexp(1.0, -12));
  EXPECT_LT(d + std::ldexp(1.0, -10) + std::ldexp(1.0, -11), 1.0 / 16);
  // T subset S: every sample of T is within 2^-10 of S.
  for (const auto& p : t) EXPECT_LT(oracle::set_d2(segs, p), pow2(-20));
}

TEST(ApproximateGraph, RayWithHiddenStart) {
  auto fx = load("ray-hidden");
  Rational window(8);
  Fuel fuel(20'000'000'000);
  auto rep = approximate_graph(fx, Rational(1, 16), fuel, window);
  ASSERT_TRUE(rep) << rep.stage();
  ASSERT_EQ(rep->cuts.size(), 1u);
  EXPECT_EQ(rep->cuts[0].case_tag, "v");
  EXPECT_EQ(rep->cuts[0].end, "start");
  EXPECT_TRUE(rep->windowed);
  EXPECT_TRUE(rep->certified);
  // Windowed closeness: the truth ray clipped to [-8, 8]^2.
  std::vector<oracle::Segment> segs;
  for (const auto& c : truth::segments(fx)) {
    Point b = c.b;
    if (c.ray) b = pt(8, 0);
    segs.push_back({c.a, b});
  }
  double d = hausdorff_to(rep->edges[0].set.approx(10), segs, std::ldexp(1.0, -10));
  EXPECT_LT(d + std::ldexp(1.0, -10) + std::ldexp(1.0, -9), 1.0 / 16);
  Point xs = truth::endpoint(*fx.edge("r0").hidden_start);
  Point z = point_approx(*rep->edges[0].start, 12);
  EXPECT_LT(oracle::d2(z, xs), Rational(1, 256));
}

TEST(ApproximateGraph, ReadsHiddenDataOnlyThroughEmissions) {
  auto fx = load("hidden-arc");
  access_log().reset();
  Fuel fuel(20'000'000'000);
  auto rep = approximate_graph(fx, Rational(1, 8), fuel);
  ASSERT_TRUE(rep);
  for (const auto& e : rep->edges) e.set.approx(8);
  EXPECT_EQ(access_log().violations, 0u);
  EXPECT_GT(access_log().emission_reads, 0u);
}
