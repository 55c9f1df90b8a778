#include "semigraph/approx.hpp"
#include "semigraph/metric.hpp"

#include "fixture_gen.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace semigraph;

namespace {

std::vector<Point> pts(std::initializer_list<std::pair<long, long>> xs) {
  std::vector<Point> out;
  for (auto [x, y] : xs) out.push_back({Rational(x), Rational(y)});
  return out;
}

QuadExpr random_quad(std::mt19937_64& rng) {
  auto small = [&](long span, long den) { return Rational(static_cast<long>(rng() % (2 * span + 1)) - span, den); };
  Rational r(static_cast<long>(rng() % 50), static_cast<long>(1 + rng() % 9));
  return QuadExpr(small(40, 1 + static_cast<long>(rng() % 12)), small(10, 1 + static_cast<long>(rng() % 6)), r);
}

std::vector<Point> random_set(std::mt19937_64& rng, std::size_t n) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({Rational(static_cast<long>(rng() % 33) - 16, 8), Rational(static_cast<long>(rng() % 33) - 16, 8)});
  return out;
}

}  // namespace

TEST(BallOf, DecodesCenterAndRadius) {
  Natural a = encoding::alpha_index({Rational(0), Rational(0)});
  Natural b = encoding::qpos_index(Rational(1));
  Ball x = ball_of(encoding::pair(a, b), 2);
  EXPECT_EQ(x.center, (Point{Rational(0), Rational(0)}));
  EXPECT_EQ(x.radius, Rational(1));
}

TEST(BallOf, IsDeterministic) {
  for (unsigned long i = 0; i <= 50; ++i) EXPECT_EQ(ball_of(i, 2), ball_of(i, 2));
}

TEST(BallOf, RadiusIsPositive) {
  for (unsigned long i = 0; i <= 1000; ++i) EXPECT_GT(ball_of(i, 3).radius, 0);
}

TEST(CmpQuad, SqrtTwoBelowThreeHalves) {
  EXPECT_EQ(cmp_quad(QuadExpr::sqrt_of(2), QuadExpr(Rational(3, 2))), Cmp::Less);
}

TEST(CmpQuad, SqrtFourEqualsOnePlusSqrtOne) {
  EXPECT_EQ(cmp_quad(QuadExpr::sqrt_of(4), QuadExpr(1, 1, 1)), Cmp::Equal);
}

TEST(CmpQuad, TwoSqrtTwoEqualsSqrtEight) {
  EXPECT_EQ(cmp_quad(QuadExpr(0, 2, 2), QuadExpr::sqrt_of(8)), Cmp::Equal);
}

TEST(CmpQuad, RejectsNegativeRadicand) { EXPECT_THROW(QuadExpr(0, 1, -1), std::invalid_argument); }

TEST(CmpQuadProperty, AgreesWithIntervalOracle) {
  std::mt19937_64 rng(3);
  int decided = 0;
  for (int t = 0; t < 3000; ++t) {
    QuadExpr x = random_quad(rng), y = random_quad(rng);
    int o = oracle::interval_compare(x.p, x.q, x.r, y.p, y.q, y.r);
    Cmp c = cmp_quad(x, y);
    if (o == 2) continue;
    ++decided;
    ASSERT_EQ(c, o < 0 ? Cmp::Less : Cmp::Greater) << t;
    ASSERT_EQ(cmp_quad(y, x), o < 0 ? Cmp::Greater : Cmp::Less) << t;
  }
  EXPECT_GT(decided, 2500);
}

TEST(CmpQuadProperty, EqualByConstruction) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    // p + q sqrt(r k^2) = p + (q k) sqrt(r)
    Rational p(static_cast<long>(rng() % 21) - 10, 3), q(static_cast<long>(rng() % 11) - 5, 2);
    Rational r(static_cast<long>(1 + rng() % 30), static_cast<long>(1 + rng() % 5));
    Rational k(static_cast<long>(1 + rng() % 7), static_cast<long>(1 + rng() % 4));
    ASSERT_EQ(cmp_quad(QuadExpr(p, q, r * k * k), QuadExpr(p, q * k, r)), Cmp::Equal);
  }
}

TEST(EpsClose, IdenticalSingletons) { EXPECT_TRUE(eps_close(pts({{0, 0}}), pts({{0, 0}}), Rational(1, 8))); }
TEST(EpsClose, StrictAtDistance) { EXPECT_FALSE(eps_close(pts({{0, 0}}), pts({{1, 0}}), Rational(1))); }
TEST(EpsClose, LargerEps) { EXPECT_TRUE(eps_close(pts({{0, 0}}), pts({{1, 0}}), Rational(2))); }
TEST(EpsClose, EmptyIsRejected) { EXPECT_THROW(eps_close({}, pts({{0, 0}}), Rational(1)), std::invalid_argument); }

TEST(HausdorffLt, AtDistanceFive) { EXPECT_FALSE(hausdorff_lt(pts({{0, 0}}), pts({{3, 4}}), Rational(5))); }
TEST(HausdorffLt, AboveDistanceFive) { EXPECT_TRUE(hausdorff_lt(pts({{0, 0}}), pts({{3, 4}}), Rational(6))); }
TEST(HausdorffLt, IdenticalSets) {
  auto a = pts({{0, 0}, {2, 1}, {-3, 5}});
  EXPECT_TRUE(hausdorff_lt(a, a, Rational(1, 1000)));
}
TEST(HausdorffLt, EmptyIsRejected) { EXPECT_THROW(hausdorff_lt(pts({{0, 0}}), {}, Rational(1)), std::invalid_argument); }

TEST(MetricProperty, EpsCloseSymmetricMonotoneAndEqualToHausdorff) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 300; ++t) {
    auto a = random_set(rng, 1 + rng() % 6), b = random_set(rng, 1 + rng() % 6);
    Rational eps(static_cast<long>(1 + rng() % 40), 8);
    bool ab = eps_close(a, b, eps);
    ASSERT_EQ(ab, eps_close(b, a, eps));
    if (ab) {
      ASSERT_TRUE(eps_close(a, b, eps + Rational(1, 16)));
    }
    ASSERT_EQ(hausdorff_lt(a, b, eps), ab);
    // d_H from its definition, compared to eps^2 exactly.
    oracle::Q h = 0;
    for (int dir = 0; dir < 2; ++dir) {
      const auto& x = dir ? b : a;
      const auto& y = dir ? a : b;
      for (const auto& p : x) {
        oracle::Q best = -1;
        for (const auto& q : y) {
          oracle::Q d = oracle::d2(p, q);
          if (best < 0 || d < best) best = d;
        }
        if (best > h) h = best;
      }
    }
    ASSERT_EQ(ab, h < eps * eps);
  }
}

TEST(MetricProperty, HausdorffTriangle) {
  std::mt19937_64 rng(13);
  int used = 0;
  for (int t = 0; t < 300; ++t) {
    auto a = random_set(rng, 1 + rng() % 5), b = random_set(rng, 1 + rng() % 5), c = random_set(rng, 1 + rng() % 5);
    Rational c1(static_cast<long>(1 + rng() % 40), 8), c2(static_cast<long>(1 + rng() % 40), 8);
    if (hausdorff_lt(a, b, c1) && hausdorff_lt(b, c, c2)) {
      ++used;
      ASSERT_TRUE(hausdorff_lt(a, c, c1 + c2));
    }
  }
  EXPECT_GT(used, 20);
}

TEST(PointApprox, ConstantPoint) {
  Point p{Rational(1, 2), Rational(1, 2)};
  auto x = ComputablePoint::constant(p);
  for (unsigned k = 0; k < 30; ++k) EXPECT_EQ(point_approx(x, k), p);
}

TEST(PointApprox, HiddenPointFromHullsIsWithinTwoToMinusK) {
  auto fx = parse_fixture(std::string(SEMIGRAPH_FIXTURES) + "/hidden-arc.json");
  const auto& h = *fx.edge("e0").hidden_end;
  auto x = hull_point(h.endpoint, 2);
  Point xs = truth::endpoint(h);
  for (unsigned k = 0; k <= 20; ++k) {
    Point a = point_approx(x, k);
    EXPECT_LT(oracle::d2(a, xs), pow2(-2 * static_cast<long>(k))) << k;
  }
}

// Hull-emitted hidden points of random tails are Cauchy at rate 2^-k + 2^-(k+1).
TEST(PointApprox, HiddenPointsAreCauchy) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto fx = parse_fixture_text(testgen::hidden_tail_fixture(seed));
    auto x = hull_point(fx.edge("e0").hidden_end->endpoint, 2);
    Point prev = point_approx(x, 0);
    for (unsigned k = 0; k < 20; ++k) {
      Point next = point_approx(x, k + 1);
      Rational c = pow2(-static_cast<long>(k)) + pow2(-static_cast<long>(k) - 1);
      ASSERT_LT(oracle::d2(prev, next), c * c) << "seed " << seed << " k " << k;
      prev = next;
    }
  }
}

// Cut endpoints are Cauchy too. Past 2^-12 each extra bit doubles the chain,
// so the sweep stops at k = 14.
TEST(PointApprox, CutEndpointsAreCauchy) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto fx = parse_fixture_text(testgen::hidden_tail_fixture(seed));
    Fuel fuel(20'000'000'000ull);
    auto cut = cut_endpoint(fixture_semicomputable(fx), fixture_ce(fx), tail_spec(fx, "e0", false), Rational(1, 8), fuel);
    ASSERT_TRUE(cut) << seed << " " << cut.stage();
    Point prev = point_approx(cut->z, 0);
    for (unsigned k = 0; k < 14; ++k) {
      Point next = point_approx(cut->z, k + 1);
      Rational c = pow2(-static_cast<long>(k)) + pow2(-static_cast<long>(k) - 1);
      ASSERT_LT(oracle::d2(prev, next), c * c) << "seed " << seed << " k " << k;
      prev = next;
    }
  }
}
