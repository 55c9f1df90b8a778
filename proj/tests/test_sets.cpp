#include "semigraph/fixture.hpp"
#include "semigraph/sets.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace semigraph;

namespace {

GraphFixture load(const std::string& name) { return parse_fixture(std::string(SEMIGRAPH_FIXTURES) + "/" + name + ".json"); }

std::vector<oracle::Segment> truth_segments(const GraphFixture& fx) {
  std::vector<oracle::Segment> out;
  for (const auto& c : truth::segments(fx)) out.push_back({c.a, c.b});
  return out;
}

Point pt(Rational x, Rational y) { return {x, y}; }

bool in_open_union(const UnionCode& u, const Point& p) {
  for (const auto& b : u.balls)
    if (oracle::d2(p, b.center) < b.radius * b.radius) return true;
  return false;
}

/// Balls of radius r centered every r/4 along the segments: a cover with margin.
UnionCode tube_cover(const std::vector<oracle::Segment>& segs, const Rational& r) {
  UnionCode u;
  for (const auto& s : segs)
    for (auto& p : PolylinePath({s.a, s.b}).sample(0, 1, r / 4)) u.balls.emplace_back(p, r);
  return u;
}

/// Hausdorff distance (in doubles) between a point set and the segments
/// sampled on a grid of step h.
double hausdorff_to(const std::vector<Point>& pts, const std::vector<oracle::Segment>& segs, double h) {
  auto g = oracle::grid_samples(segs, h);
  auto p = oracle::to_doubles(pts);
  return std::max(oracle::directed_hausdorff(g, p), oracle::directed_hausdorff(p, g));
}

const Ball kBig(pt(0, 0), Rational(16));

}  // namespace

TEST(UnionCode, Idempotent) {
  UnionCode a({Ball(pt(0, 0), 1), Ball(pt(1, 0), 2)});
  EXPECT_EQ(union_code(a, a), a);
}

TEST(UnionCode, DisjointIndexSets) {
  UnionCode a({ball_of(1, 2), ball_of(2, 2)}), b({ball_of(3, 2)});
  auto idx = encoding::finite_set_of(union_code(a, b).code());
  std::vector<Natural> want{ball_of(1, 2).index(), ball_of(2, 2).index(), ball_of(3, 2).index()};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(idx, want);
}

TEST(UnionCode, Commutative) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    UnionCode a, b;
    for (std::size_t i = 0; i < 1 + rng() % 4; ++i) a.balls.push_back(ball_of(rng() % 40, 2));
    for (std::size_t i = 0; i < 1 + rng() % 4; ++i) b.balls.push_back(ball_of(rng() % 40, 2));
    ASSERT_EQ(encoding::finite_set_of(union_code(a, b).code()), encoding::finite_set_of(union_code(b, a).code()));
  }
}

TEST(SubtractUnion, DelegatesOneComposition) {
  std::vector<UnionCode> seen;
  SemicomputableSet s(2, [&](const Ball&, const UnionCode& j, unsigned, Fuel&) {
    seen.push_back(j);
    return true;
  });
  UnionCode m({Ball(pt(5, 5), 1)}), j({Ball(pt(0, 0), 1)});
  Fuel fuel(10);
  EXPECT_TRUE(subtract_union(s, m).omega(Ball(pt(0, 0), 2), j, 3, fuel));
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(encoding::finite_set_of(seen[0].code()), encoding::finite_set_of(union_code(j, m).code()));
}

TEST(SubtractUnion, MissingMLeavesApproximationsUnchanged) {
  auto fx = load("straight-arc");
  auto segs = truth_segments(fx);
  UnionCode m({Ball(pt(5, 5), 1)});
  auto sub = restrict_to_ball(subtract_union(fixture_semicomputable(fx), m), kBig);
  Fuel fuel(2'000'000'000);
  auto a = approximate(fixture_ce(fx), sub, 6, fuel);
  ASSERT_TRUE(a) << a.stage();
  EXPECT_LT(hausdorff_to(*a, segs, std::ldexp(1.0, -12)), std::ldexp(1.0, -6) + std::ldexp(1.0, -11));
}

TEST(SubtractUnion, CoveringMLeavesNothing) {
  auto fx = load("straight-arc");
  UnionCode m({Ball(pt(Rational(1, 2), 0), 1)});
  auto sub = restrict_to_ball(subtract_union(fixture_semicomputable(fx), m), kBig);
  UnionCode tiny({Ball(pt(9, 9), pow2(-10))});
  Fuel fuel(1'000'000);
  bool covered = false;
  for (unsigned s = 0; s < 12 && !covered; ++s) covered = sub.covers(tiny, s, fuel);
  EXPECT_TRUE(covered);
}

// Output points of S \ J_m stay within 2^-k of S \ J_m, so none sits deeper
// than 2^-k inside J_m.
TEST(SubtractUnion, ApproximationStaysOutOfM) {
  auto fx = load("straight-arc");
  Ball mb(pt(0, 0), Rational(1, 2));
  auto sub = restrict_to_ball(subtract_union(fixture_semicomputable(fx), UnionCode({mb})), kBig);
  // S \ J_m = [1/2, 1] x {0}; its c.e. side comes from the ground truth.
  auto rest = polyline_set(PolylinePath({pt(Rational(1, 2), 0), pt(1, 0)}), 0, 1);
  for (unsigned k = 2; k <= 6; ++k) {
    Fuel fuel(2'000'000'000);
    auto a = approximate(ce_of(rest), sub, k, fuel);
    ASSERT_TRUE(a) << a.stage();
    Rational e = pow2(-static_cast<long>(k));
    for (const auto& p : *a) {
      // |p - c| >= r - 2^-k, i.e. (r - e)^2 <= d2 since r - e > 0 here.
      EXPECT_GE(oracle::d2(p, mb.center), (mb.radius - e) * (mb.radius - e)) << k;
    }
    std::vector<oracle::Segment> segs{{pt(Rational(1, 2), 0), pt(1, 0)}};
    EXPECT_LT(hausdorff_to(*a, segs, std::ldexp(1.0, -12)), e.get_d() + std::ldexp(1.0, -11)) << k;
  }
}

TEST(RestrictToBall, DelegatesToOmega) {
  int calls = 0;
  SemicomputableSet s(2, [&](const Ball& i, const UnionCode&, unsigned, Fuel&) {
    ++calls;
    return i.radius == 3;
  });
  Fuel fuel(10);
  UnionCode j({Ball(pt(0, 0), 1)});
  EXPECT_TRUE(restrict_to_ball(s, Ball(pt(0, 0), 3)).covers(j, 0, fuel));
  EXPECT_FALSE(restrict_to_ball(s, Ball(pt(0, 0), 2)).covers(j, 0, fuel));
  EXPECT_EQ(calls, 2);
}

TEST(RestrictToBall, BigBallCoversAreCoversOfS) {
  auto fx = load("sine-arc");
  auto segs = truth_segments(fx);
  auto sc = restrict_to_ball(fixture_semicomputable(fx), kBig);
  // A tube cover of S is accepted at some stage.
  auto good = tube_cover(segs, Rational(1, 8));
  Fuel fuel(100'000'000);
  bool ok = false;
  for (unsigned s = 0; s < 16 && !ok; ++s) ok = sc.covers(good, s, fuel);
  EXPECT_TRUE(ok);
  // Accepted covers contain S on a dense grid; a cover missing a piece is never accepted.
  std::mt19937_64 rng(3);
  int accepted = 0;
  for (int t = 0; t < 60; ++t) {
    UnionCode j;
    for (const auto& b : good.balls)
      if (rng() % 12) j.balls.push_back(b);
    Fuel f(10'000'000);
    bool cov = false;
    for (unsigned s = 0; s < 10 && !cov; ++s) cov = sc.covers(j, s, f);
    if (!cov) continue;
    ++accepted;
    for (const auto& g : segs)
      for (auto& p : PolylinePath({g.a, g.b}).sample(0, 1, pow2(-8))) ASSERT_TRUE(in_open_union(j, p)) << t;
  }
  EXPECT_GT(accepted, 0);
}

TEST(RestrictToBall, BallAwayFromSHasArbitrarilySmallCovers) {
  auto fx = load("straight-arc");
  auto sc = restrict_to_ball(fixture_semicomputable(fx), Ball(pt(0, 5), 1));
  UnionCode tiny({Ball(pt(-7, -7), pow2(-20))});
  Fuel fuel(1'000'000);
  bool ok = false;
  for (unsigned s = 0; s < 12 && !ok; ++s) ok = sc.covers(tiny, s, fuel);
  EXPECT_TRUE(ok);
}

TEST(CarveCompact, MiddleThirdInsideTube) {
  auto fx = load("sine-arc");
  auto s = fixture_semicomputable(fx);
  auto path = fx.edge("e0").path();
  Rational t0 = path.max_param() / 3, t1 = 2 * path.max_param() / 3;
  auto k = polyline_set(path, t0, t1);
  // U: radius-1/4 balls along K.
  UnionCode u;
  for (auto& p : path.sample(t0, t1, Rational(1, 32))) u.balls.emplace_back(p, Rational(1, 4));
  Fuel fuel(4'000'000'000);
  auto c = carve_compact(s, k, u, fuel);
  ASSERT_TRUE(c) << c.stage();
  auto in_ball = [&](const Point& p) { return oracle::d2(p, c->ball.center) <= c->ball.radius * c->ball.radius; };
  auto in_closed_m = [&](const Point& p) {
    for (const auto& b : c->m.balls)
      if (oracle::d2(p, b.center) <= b.radius * b.radius) return true;
    return false;
  };
  // K subset S': K is inside the ball and off the closure of J_m.
  for (const auto& p : path.sample(t0, t1, pow2(-8))) {
    ASSERT_TRUE(in_ball(p));
    ASSERT_FALSE(in_closed_m(p));
  }
  // S' subset U: points of S in the ball and outside J_m lie in U.
  for (const auto& g : truth_segments(fx))
    for (const auto& p : PolylinePath({g.a, g.b}).sample(0, 1, pow2(-8))) {
      if (!in_ball(p) || in_open_union(c->m, p)) continue;
      ASSERT_TRUE(in_open_union(u, p));
    }
}

TEST(CarveCompact, HugeUKeepsTheWholeBall) {
  auto fx = load("straight-arc");
  auto s = fixture_semicomputable(fx);
  auto k = polyline_set(fx.edge("e0").path(), Rational(1, 3), Rational(2, 3));
  UnionCode u({Ball(pt(0, 0), 64)});
  Fuel fuel(1'000'000'000);
  auto c = carve_compact(s, k, u, fuel);
  ASSERT_TRUE(c) << c.stage();
  // S' = I-hat_i n S: every m-ball is formally disjoint from the ball.
  for (const auto& b : c->m.balls) EXPECT_TRUE(f_disjoint_balls(b, c->ball));
  auto l = restrict_to_ball(s, c->ball);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    UnionCode j;
    for (std::size_t i = 0; i < 1 + rng() % 4; ++i)
      j.balls.emplace_back(pt(Rational(static_cast<long>(rng() % 9), 8), 0), Rational(static_cast<long>(1 + rng() % 4), 8));
    for (unsigned st = 4; st < 10; ++st) {
      Fuel f1(10'000'000), f2(10'000'000);
      ASSERT_EQ(c->set.covers(j, st, f1), l.covers(j, st, f2)) << t << " " << st;
    }
  }
}

TEST(CarveCompact, ZeroFuelTimesOut) {
  auto fx = load("straight-arc");
  auto k = polyline_set(fx.edge("e0").path(), Rational(1, 3), Rational(2, 3));
  Fuel fuel(0);
  EXPECT_FALSE(carve_compact(fixture_semicomputable(fx), k, UnionCode({Ball(pt(0, 0), 64)}), fuel));
}

TEST(Approximate, UnitSegmentAtKTwo) {
  auto fx = load("straight-arc");
  Fuel fuel(1'000'000'000);
  auto a = approximate(fixture_ce(fx), fixture_semicompact(fx), 2, fuel);
  ASSERT_TRUE(a) << a.stage();
  EXPECT_LT(hausdorff_to(*a, truth_segments(fx), std::ldexp(1.0, -12)), 0.25 - std::ldexp(1.0, -11));
}

TEST(Approximate, Singleton) {
  Point p = pt(Rational(1, 3), Rational(-2, 7));
  auto k = ComputableCompactSet::finite({p});
  for (unsigned e = 0; e <= 8; ++e) {
    Fuel fuel(100'000'000);
    auto a = approximate(ce_of(k), restrict_to_ball(semicomputable_of(k), kBig), e, fuel);
    ASSERT_TRUE(a) << a.stage();
    ASSERT_FALSE(a->empty());
    for (const auto& q : *a) EXPECT_LT(oracle::d2(q, p), pow2(-2 * static_cast<long>(e))) << e;
  }
}

TEST(Approximate, ZeroFuelTimesOut) {
  auto fx = load("straight-arc");
  Fuel fuel(0);
  EXPECT_FALSE(approximate(fixture_ce(fx), fixture_semicompact(fx), 2, fuel));
}

TEST(SetsProperty, ApproximationsAreCauchyAndClose) {
  for (const char* name : {"straight-arc", "sine-arc", "hidden-arc", "triangle-with-tail"}) {
    auto fx = load(name);
    auto segs = truth_segments(fx);
    auto ce = fixture_ce(fx);
    auto sc = fixture_semicompact(fx);
    std::vector<Point> prev;
    for (unsigned k = 0; k <= 8; ++k) {
      Fuel fuel(4'000'000'000);
      auto a = approximate(ce, sc, k, fuel);
      ASSERT_TRUE(a) << name << " " << k << " " << a.stage();
      double e = std::ldexp(1.0, -static_cast<int>(k));
      EXPECT_LT(hausdorff_to(*a, segs, std::ldexp(1.0, -12)), e + std::ldexp(1.0, -11)) << name << " " << k;
      if (k > 0) {
        auto x = oracle::to_doubles(prev), y = oracle::to_doubles(*a);
        double d = std::max(oracle::directed_hausdorff(x, y), oracle::directed_hausdorff(y, x));
        EXPECT_LT(d, 2 * e + e) << name << " " << k;  // 2^-(k-1) + 2^-k
      }
      prev = *a;
    }
  }
}

TEST(SetsProperty, EnumeratorEmissionsAreSound) {
  auto fx = load("hidden-arc");
  auto segs = truth_segments(fx);
  HitsEnumerator hits(fixture_ce(fx));
  Fuel fuel(20'000'000);
  int emitted = 0;
  while (emitted < 200) {
    auto i = hits.next(fuel);
    if (!i) break;
    ++emitted;
    Ball b = ball_of(*i, 2);
    ASSERT_LT(oracle::set_d2(segs, b.center), b.radius * b.radius) << *i;
  }
  EXPECT_GT(emitted, 10);

  OmegaEnumerator omega(fixture_semicomputable(fx));
  Fuel f2(20'000'000);
  int pairs = 0;
  while (pairs < 100) {
    auto ij = omega.next(f2);
    if (!ij) break;
    ++pairs;
    Ball b = ball_of(ij->first, 2);
    UnionCode j = UnionCode::from_code(ij->second, 2);
    for (const auto& g : segs)
      for (const auto& p : PolylinePath({g.a, g.b}).sample(0, 1, pow2(-7)))
        if (oracle::d2(p, b.center) <= b.radius * b.radius) {
          ASSERT_TRUE(in_open_union(j, p));
        }
  }
  EXPECT_GT(pairs, 10);
}

TEST(SetsProperty, AlgorithmsReadNoHiddenDataOutsideEmissions) {
  auto fx = load("hidden-arc");
  access_log().reset();
  Fuel fuel(1'000'000'000);
  auto a = approximate(fixture_ce(fx), fixture_semicompact(fx), 5, fuel);
  ASSERT_TRUE(a);
  EXPECT_EQ(access_log().violations, 0u);
  EXPECT_EQ(access_log().harness_reads, 0u);
}

TEST(SeparatorSearch, SinglePoint) {
  Point p = pt(0, 0);
  auto a = ComputableCompactSet::finite({p});
  Fuel fuel(1'000'000);
  auto j = separator_search(a, Rational(1, 2), fuel);
  ASSERT_TRUE(j);
  for (const auto& b : j->balls) EXPECT_LT(b.radius, Rational(1, 2));
  EXPECT_TRUE(in_open_union(*j, p));
}

TEST(SeparatorSearch, TwoPointsNeedTwoBalls) {
  auto a = ComputableCompactSet::finite({pt(0, 0), pt(1, 0)});
  Fuel fuel(1'000'000);
  auto j = separator_search(a, Rational(1, 4), fuel);
  ASSERT_TRUE(j);
  EXPECT_GE(j->size(), 2u);
  for (const auto& b : j->balls) EXPECT_LT(b.radius, Rational(1, 4));
  EXPECT_TRUE(in_open_union(*j, pt(0, 0)));
  EXPECT_TRUE(in_open_union(*j, pt(1, 0)));
}

TEST(SeparatorSearch, ZeroFuelTimesOut) {
  auto a = ComputableCompactSet::finite({pt(0, 0)});
  Fuel fuel(0);
  EXPECT_FALSE(separator_search(a, Rational(1, 2), fuel));
}

TEST(SeparatorSearch, OutputPassesSubsetEps) {
  auto fx = load("sine-arc");
  auto a = polyline_set(fx.edge("e0").path(), 0, fx.edge("e0").path().max_param());
  for (Rational eps : {Rational(1, 2), Rational(1, 8), Rational(1, 32)}) {
    Fuel fuel(100'000'000);
    auto j = separator_search(a, eps, fuel);
    ASSERT_TRUE(j);
    Fuel f2(100'000'000);
    EXPECT_EQ(subset_eps_semidecide(a, eps, *j, f2), Semi::Yes);
  }
}
