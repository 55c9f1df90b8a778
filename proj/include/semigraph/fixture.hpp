#pragma once

// Graph fixtures: finite unions of polygonal arcs and rays in Q^n, some of
// whose endpoints are hidden. A hidden endpoint x* sits on a known carrier
// segment [v, c] and is revealed only through a nested sequence of boxes
// (hulls) that shrink to it. The fixture exposes its set S through the
// semideciders of sets.hpp; the exact location of x* is read only by those
// emissions and by the test harness, and every other read is counted.

#include "semigraph/compact_set.hpp"
#include "semigraph/geometry.hpp"
#include "semigraph/sets.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace semigraph {

// ---------------------------------------------------------------------------
// Access accounting

struct AccessLog {
  std::uint64_t emission_reads = 0;
  std::uint64_t harness_reads = 0;
  std::uint64_t violations = 0;
  int emission_depth = 0;
  int harness_depth = 0;

  void reset() { emission_reads = harness_reads = violations = 0; }
};

inline AccessLog& access_log() {
  static thread_local AccessLog log;
  return log;
}

/// Marks reads of hidden data as part of an enumerator emission.
class EmissionScope {
public:
  EmissionScope() { ++access_log().emission_depth; }
  ~EmissionScope() { --access_log().emission_depth; }
  EmissionScope(const EmissionScope&) = delete;
  EmissionScope& operator=(const EmissionScope&) = delete;
};

/// Marks reads of hidden data as privileged (tests, fixture validation).
class HarnessScope {
public:
  HarnessScope() { ++access_log().harness_depth; }
  ~HarnessScope() { --access_log().harness_depth; }
  HarnessScope(const HarnessScope&) = delete;
  HarnessScope& operator=(const HarnessScope&) = delete;
};

/// Axis-aligned closed box.
struct Box {
  Point lo, hi;

  Point center() const {
    Point c(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) c[i] = (lo[i] + hi[i]) / 2;
    return c;
  }
  Rational max_half_width() const {
    Rational m = 0;
    for (std::size_t i = 0; i < lo.size(); ++i) m = rmax(m, (hi[i] - lo[i]) / 2);
    return m;
  }
  bool contains(const Point& p) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  bool strictly_contains(const Point& p) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] < p[i] && p[i] < hi[i])) return false;
    return true;
  }
  bool strictly_inside(const Box& outer) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(outer.lo[i] < lo[i] && hi[i] < outer.hi[i])) return false;
    return true;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

/// A hidden endpoint: the truth plus the explicit part of its hull schedule.
/// Past the n explicit hulls, stage s uses the dyadic cube containing x* of
/// side 2^-(L0 + 1 + s - n), clipped to the last explicit hull, where
/// 2^-L0 is the largest power of two at most min(1, width of that hull).
class HiddenEndpoint {
public:
  HiddenEndpoint() = default;
  HiddenEndpoint(Point truth, std::vector<Box> hulls) : truth_(std::move(truth)), hulls_(std::move(hulls)) {}

  const std::vector<Box>& explicit_hulls() const { return hulls_; }

  Box hull(unsigned s) const {
    if (s < hulls_.size()) return hulls_[s];
    EmissionScope scope;
    const Point& x = read();
    Box last = hulls_.empty() ? Box{x, x} : hulls_.back();
    long l0 = hulls_.empty() ? 0 : floor_log2_inv(rmin(Rational(1), 2 * last.max_half_width()));
    long level = l0 + 1 + static_cast<long>(s - hulls_.size());
    Rational side = pow2(-level);
    Box b;
    b.lo.resize(x.size());
    b.hi.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      Rational q = x[i] / side;
      Natural fl;
      mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
      Rational lo = Rational(fl) * side;
      b.lo[i] = hulls_.empty() ? lo : rmax(lo, last.lo[i]);
      b.hi[i] = hulls_.empty() ? lo + side : rmin(lo + side, last.hi[i]);
    }
    return b;
  }

  /// The exact point; counted as a violation outside emission/harness scopes.
  const Point& truth() const { return read(); }

private:
  const Point& read() const {
    auto& log = access_log();
    if (log.emission_depth > 0)
      ++log.emission_reads;
    else if (log.harness_depth > 0)
      ++log.harness_reads;
    else
      ++log.violations;
    return truth_;
  }

  Point truth_;
  std::vector<Box> hulls_;
};

/// A hidden end of an edge: x* lies strictly inside the carrier segment from
/// the last known vertex to `carrier`.
struct HiddenEnd {
  HiddenEndpoint endpoint;
  Point carrier;
};

enum class EdgeKind { Arc, Ray };

inline const char* to_string(EdgeKind k) { return k == EdgeKind::Arc ? "arc" : "ray"; }

struct Edge {
  std::string id;
  EdgeKind kind = EdgeKind::Arc;
  std::vector<Point> points;  // known polyline
  Point direction;            // rays: continues from points.back() along this
  std::optional<HiddenEnd> hidden_start, hidden_end;

  bool is_ray() const { return kind == EdgeKind::Ray; }
  PolylinePath path() const {
    if (points.size() >= 2) return PolylinePath(points);
    return PolylinePath({points.front(), add(points.front(), direction)});
  }
};

/// A chart: f(s) = path(from + (s + 4)(to - from)/8) on [-4, 4], with the
/// parameters t_a, t_b of the points a~ = f(t_a) and b~ = f(t_b).
struct ChartSpec {
  std::string id;
  std::string edge;
  Rational from, to;
  Rational t_a = -2, t_b = 2;
};

struct Capsule {
  Point a, b;
  Rational w;
  bool ray = false;  // b - a is the direction of an unbounded ray
};

class GraphFixture {
public:
  std::string name;
  std::size_t dim = 2;
  Rational tube = Rational(1, 64);  // known-segment tube width at stage 0
  std::vector<Edge> edges;
  std::vector<ChartSpec> charts;

  const Edge& edge(const std::string& id) const {
    for (const auto& e : edges)
      if (e.id == id) return e;
    throw std::out_of_range("no edge '" + id + "'");
  }
  const ChartSpec& chart(const std::string& id) const {
    for (const auto& c : charts)
      if (c.id == id) return c;
    throw std::out_of_range("no chart '" + id + "'");
  }

  bool has_rays() const {
    for (const auto& e : edges)
      if (e.is_ray()) return true;
    return false;
  }

  std::size_t hidden_count() const {
    std::size_t n = 0;
    for (const auto& e : edges) n += (e.hidden_start ? 1 : 0) + (e.hidden_end ? 1 : 0);
    return n;
  }

  /// Known segments and rays (no hidden tails).
  std::vector<Capsule> known_segments() const {
    std::vector<Capsule> out;
    for (const auto& e : edges) {
      for (std::size_t k = 0; k + 1 < e.points.size(); ++k) out.push_back({e.points[k], e.points[k + 1], 0, false});
      if (e.is_ray()) out.push_back({e.points.back(), add(e.points.back(), e.direction), 0, true});
    }
    return out;
  }

  /// Carrier segments [v, c] that contain the hidden tails.
  std::vector<Capsule> carrier_segments() const {
    std::vector<Capsule> out;
    for (const auto& e : edges) {
      if (e.hidden_start) out.push_back({e.points.front(), e.hidden_start->carrier, 0, false});
      if (e.hidden_end) out.push_back({e.points.back(), e.hidden_end->carrier, 0, false});
    }
    return out;
  }

  /// S_s: capsules containing S at stage s.
  std::vector<Capsule> over_approx(unsigned s) const {
    Rational w = tube * pow2(-static_cast<long>(s));
    std::vector<Capsule> out = known_segments();
    for (auto& c : out) c.w = w;
    Rational hd = half_diag(dim);
    auto tail = [&](const Point& v, const HiddenEnd& h) {
      Box b = h.endpoint.hull(s);
      out.push_back({v, b.center(), w + hd * b.max_half_width(), false});
    };
    for (const auto& e : edges) {
      if (e.hidden_start) tail(e.points.front(), *e.hidden_start);
      if (e.hidden_end) tail(e.points.back(), *e.hidden_end);
    }
    return out;
  }

  /// A ball containing S when no edge is a ray; computed from known data.
  Ball bounding_ball() const {
    std::vector<Point> pts;
    for (const auto& e : edges) {
      for (const auto& p : e.points) pts.push_back(p);
      for (const auto* h : {&e.hidden_start, &e.hidden_end})
        if (*h) pts.push_back((*h)->carrier);
    }
    Point c = pts.front();
    Rational r2 = 0;
    for (const auto& p : pts) r2 = rmax(r2, dist2(c, p));
    return Ball(c, sqrt_upper(r2, 10) + 1);
  }

  static Rational half_diag(std::size_t d) {
    if (d == 1) return 1;
    if (d == 2) return Rational(3, 2);
    return sqrt_upper(Rational(static_cast<long>(d)), 8);
  }
};

// ---------------------------------------------------------------------------
// Semideciders

namespace detail {

/// Upper bound T so that points a + t d with t > T lie outside the closed
/// ball B(c, rho + w).
inline Rational ray_clip(const Point& a, const Point& d, const Ball& q, const Rational& w) {
  return (sqrt_upper(dist2(a, q.center), 20) + q.radius + w) / sqrt_lower(dot(d, d), 20) + 1;
}

/// Certifies capsule(a, b, w) n B-hat(q) subset J by bisection.
inline bool certify_capsule(const Point& a, const Point& b, const Rational& w, const Ball& q, const BallIndex& j,
                            unsigned depth, Fuel& fuel) {
  fuel.spend();
  Rational reach = q.radius + w;
  if (seg_point_dist2(a, b, q.center) > reach * reach) return true;
  auto ad = to_doubles(a), bd = to_doubles(b);
  double wd = w.get_d();
  auto inside_ball = [&](const Ball& ball, const Point& p, const std::vector<double>& pd) {
    double sd = ball.radius_d - wd;
    int f = filter_dist2(pd.data(), ball.center_d.data(), pd.size(), sd, 0x1p-50 * (ball.radius_d + std::fabs(wd)));
    if (f != 0) return f > 0;
    return dist_plus_lt(p, ball.center, w, ball.radius);
  };
  bool inside = false;
  j.near(ad, 0.0, [&](const BallIndex::Entry& e) {
    if (!inside && inside_ball(*e.ball, a, ad) && inside_ball(*e.ball, b, bd)) inside = true;
  });
  if (inside) return true;
  if (depth == 0) return false;
  Point mid = lerp(a, b, Rational(1, 2));
  return certify_capsule(a, mid, w, q, j, depth - 1, fuel) && certify_capsule(mid, b, w, q, j, depth - 1, fuel);
}

}  // namespace detail

/// omega(i, j, s): every capsule of S_s, cut by the closed query ball, is
/// certified piecewise inside single balls of J.
inline SemicomputableSet fixture_semicomputable(const GraphFixture& fx) {
  auto g = std::make_shared<GraphFixture>(fx);
  return SemicomputableSet(fx.dim, [g](const Ball& q, const UnionCode& j, unsigned s, Fuel& fuel) {
    auto caps = g->over_approx(s);
    BallIndex idx(j);
    unsigned depth = s + 6;
    for (const auto& c : caps) {
      fuel.spend();
      Point b = c.b;
      if (c.ray) b = add(c.a, scale(sub(c.b, c.a), detail::ray_clip(c.a, sub(c.b, c.a), q, c.w)));
      if (!detail::certify_capsule(c.a, b, c.w, q, idx, depth, fuel)) return false;
    }
    return true;
  });
}

/// hits(B, s): B meets a known segment, or a point of a hidden tail located
/// through hull_s at a dyadic parameter.
inline CeClosedSet fixture_ce(const GraphFixture& fx) {
  auto g = std::make_shared<GraphFixture>(fx);
  return CeClosedSet(fx.dim, [g](const Ball& ball, unsigned s, Fuel& fuel) {
    Rational r2 = ball.radius * ball.radius;
    for (const auto& c : g->known_segments()) {
      fuel.spend();
      if (seg_point_dist2(c.a, c.b, ball.center, c.ray) < r2) return true;
    }
    Rational hd = GraphFixture::half_diag(g->dim);
    unsigned q = std::min(s, 10u);
    auto tail = [&](const Point& v, const HiddenEnd& h) {
      Box b = h.endpoint.hull(s);
      Point c = b.center();
      Rational err = hd * b.max_half_width();
      for (unsigned long k = 1; k <= (1ul << q); ++k) {
        fuel.spend();
        Rational t(static_cast<long>(k), static_cast<long>(1ul << q));
        if (dist_plus_lt(lerp(v, c, t), ball.center, t * err, ball.radius)) return true;
      }
      return false;
    };
    for (const auto& e : g->edges) {
      if (e.hidden_start && tail(e.points.front(), *e.hidden_start)) return true;
      if (e.hidden_end && tail(e.points.back(), *e.hidden_end)) return true;
    }
    return false;
  });
}

/// covers(j, s) = omega(bounding ball, j, s), for fixtures without rays.
inline SemicompactSet fixture_semicompact(const GraphFixture& fx) {
  if (fx.has_rays()) throw std::invalid_argument("fixture_semicompact: fixture has rays");
  return restrict_to_ball(fixture_semicomputable(fx), fx.bounding_ball());
}

/// A polyline as a computable compact set (samples at spacing 2^-k).
inline ComputableCompactSet polyline_set(const PolylinePath& path, const Rational& t0, const Rational& t1) {
  return ComputableCompactSet(path.dim(), [path, t0, t1](unsigned k) {
    return path.sample(t0, t1, pow2(-static_cast<long>(k)));
  });
}

// ---------------------------------------------------------------------------
// Parsing and validation

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline Rational rat_field(const nlohmann::json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a rational string \"p/q\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline Point point_field(const nlohmann::json& j, std::size_t dim, const std::string& where) {
  if (!j.is_array() || j.size() != dim) throw ParseError(where + ": expected " + std::to_string(dim) + " coordinates");
  Point p;
  for (std::size_t i = 0; i < dim; ++i) p.push_back(rat_field(j[i], where + "[" + std::to_string(i) + "]"));
  return p;
}

inline std::optional<HiddenEnd> hidden_field(const nlohmann::json& j, std::size_t dim, const std::string& where) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_object() || !j.contains("hidden")) throw ParseError(where + ": expected null or {\"hidden\": ...}");
  const auto& h = j["hidden"];
  for (const char* key : {"truth", "carrier"})
    if (!h.contains(key)) throw ParseError(where + ".hidden: missing \"" + key + "\"");
  HiddenEnd out;
  Point truth = point_field(h["truth"], dim, where + ".hidden.truth");
  out.carrier = point_field(h["carrier"], dim, where + ".hidden.carrier");
  std::vector<Box> hulls;
  if (h.contains("hulls")) {
    std::size_t k = 0;
    for (const auto& b : h["hulls"]) {
      std::string w = where + ".hidden.hulls[" + std::to_string(k++) + "]";
      hulls.push_back({point_field(b.at("lo"), dim, w + ".lo"), point_field(b.at("hi"), dim, w + ".hi")});
    }
  }
  out.endpoint = HiddenEndpoint(std::move(truth), std::move(hulls));
  return out;
}

struct Piece {
  std::size_t edge;
  std::size_t index;  // position along the edge, tails at the ends
  Point a, b;
  bool ray;
  bool a_vertex, b_vertex;  // endpoint is a graph vertex (known edge endpoint)
};

inline std::vector<Piece> validation_pieces(const GraphFixture& fx) {
  std::vector<Piece> out;
  for (std::size_t ei = 0; ei < fx.edges.size(); ++ei) {
    const auto& e = fx.edges[ei];
    std::size_t idx = 0;
    if (e.hidden_start) out.push_back({ei, idx++, e.hidden_start->carrier, e.points.front(), false, false, false});
    for (std::size_t k = 0; k + 1 < e.points.size(); ++k) {
      bool av = k == 0 && !e.hidden_start;
      bool bv = k + 2 == e.points.size() && !e.hidden_end && !e.is_ray();
      out.push_back({ei, idx++, e.points[k], e.points[k + 1], false, av, bv});
    }
    if (e.is_ray())
      out.push_back({ei, idx++, e.points.back(), add(e.points.back(), e.direction), true,
                     e.points.size() == 1 && !e.hidden_start, false});
    if (e.hidden_end) out.push_back({ei, idx++, e.points.back(), e.hidden_end->carrier, false, false, false});
  }
  return out;
}

}  // namespace detail

/// Checks the defining-family condition on the known data (carriers stand in
/// for hidden tails) and the hidden-endpoint invariants.
inline void validate_fixture(const GraphFixture& fx) {
  if (fx.edges.empty()) throw ParseError("fixture has no edges");
  for (const auto& e : fx.edges) {
    if (e.points.empty()) throw ParseError("edge " + e.id + ": no points");
    if (!e.is_ray() && e.points.size() < 2) throw ParseError("edge " + e.id + ": an arc needs two points");
    if (e.is_ray() && e.hidden_end) throw ParseError("edge " + e.id + ": a ray has no far endpoint");
    if (e.is_ray() && dot(e.direction, e.direction) == 0) throw ParseError("edge " + e.id + ": zero ray direction");
    for (std::size_t k = 0; k + 1 < e.points.size(); ++k)
      if (e.points[k] == e.points[k + 1]) throw ParseError("edge " + e.id + ": repeated vertex");
    for (const auto* hp : {&e.hidden_start, &e.hidden_end}) {
      if (!*hp) continue;
      const HiddenEnd& h = **hp;
      const Point& v = (hp == &e.hidden_start) ? e.points.front() : e.points.back();
      HarnessScope scope;
      const Point& x = h.endpoint.truth();
      Point u = sub(h.carrier, v), t = sub(x, v);
      Rational uu = dot(u, u), ut = dot(u, t);
      if (uu == 0 || !(ut > 0 && ut < uu) || ut * ut != uu * dot(t, t))
        throw ParseError("edge " + e.id + ": hidden endpoint is not strictly inside its carrier segment");
      const auto& hulls = h.endpoint.explicit_hulls();
      for (std::size_t k = 0; k < hulls.size(); ++k) {
        if (!hulls[k].strictly_contains(x))
          throw ParseError("edge " + e.id + ": hull " + std::to_string(k) + " does not contain the endpoint");
        if (k > 0 && !hulls[k].strictly_inside(hulls[k - 1]))
          throw ParseError("edge " + e.id + ": hulls " + std::to_string(k - 1) + " and " + std::to_string(k) +
                           " are not strictly nested");
      }
    }
  }
  auto pieces = detail::validation_pieces(fx);
  for (std::size_t p = 0; p < pieces.size(); ++p)
    for (std::size_t q = p + 1; q < pieces.size(); ++q) {
      const auto& A = pieces[p];
      const auto& B = pieces[q];
      bool same = A.edge == B.edge;
      if (same && B.index == A.index + 1) {
        if (folds_back(A.a, A.b, B.b)) throw ParseError("edge " + fx.edges[A.edge].id + ": polyline folds back");
        continue;
      }
      // Shared graph vertex between different edges.
      std::optional<Point> shared;
      if (!same) {
        for (auto [pa, va] : {std::pair{&A.a, A.a_vertex}, std::pair{&A.b, A.b_vertex}})
          for (auto [pb, vb] : {std::pair{&B.a, B.a_vertex}, std::pair{&B.b, B.b_vertex}})
            if (va && vb && *pa == *pb) shared = *pa;
      }
      Rational d2 = seg_seg_dist2(A.a, A.b, B.a, B.b, A.ray, B.ray);
      if (d2 > 0) continue;
      std::string pair = "edges " + fx.edges[A.edge].id + " and " + fx.edges[B.edge].id;
      if (!shared) throw ParseError(pair + " intersect away from a shared endpoint");
      const Point& oa = (A.a == *shared) ? A.b : A.a;
      const Point& ob = (B.a == *shared) ? B.b : B.a;
      if (folds_back(oa, *shared, ob)) throw ParseError(pair + " overlap along a segment");
      // Straight pieces sharing one endpoint meet only there.
    }
  for (const auto& c : fx.charts) {
    const Edge& e = fx.edge(c.edge);
    Rational n(static_cast<long>(e.path().segments()));
    if (!(0 <= c.from && c.from < c.to && c.to <= n) && !(0 <= c.to && c.to < c.from && c.from <= n))
      throw ParseError("chart " + c.id + ": parameter range outside edge " + e.id);
    if (!(-Rational(5, 2) < c.t_a && c.t_a < -Rational(3, 2)) || !(Rational(3, 2) < c.t_b && c.t_b < Rational(5, 2)))
      throw ParseError("chart " + c.id + ": t_a must lie in (-5/2,-3/2) and t_b in (3/2,5/2)");
  }
}

inline GraphFixture parse_fixture_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  GraphFixture fx;
  fx.name = j.value("name", std::string("fixture"));
  if (!j.contains("dim") || !j["dim"].is_number_unsigned()) throw ParseError("dim: expected a positive integer");
  fx.dim = j["dim"].get<std::size_t>();
  if (fx.dim == 0) throw ParseError("dim: expected a positive integer");
  if (j.contains("tube")) fx.tube = detail::rat_field(j["tube"], "tube");
  if (!(fx.tube > 0)) throw ParseError("tube: must be positive");
  if (!j.contains("edges") || !j["edges"].is_array()) throw ParseError("edges: expected an array");
  std::size_t k = 0;
  for (const auto& je : j["edges"]) {
    std::string w = "edges[" + std::to_string(k++) + "]";
    Edge e;
    e.id = je.value("id", w);
    std::string kind = je.value("kind", std::string("arc"));
    if (kind == "arc")
      e.kind = EdgeKind::Arc;
    else if (kind == "ray")
      e.kind = EdgeKind::Ray;
    else
      throw ParseError(w + ".kind: expected \"arc\" or \"ray\"");
    if (!je.contains("points") || !je["points"].is_array()) throw ParseError(w + ".points: expected an array");
    std::size_t pi = 0;
    for (const auto& p : je["points"]) e.points.push_back(detail::point_field(p, fx.dim, w + ".points[" + std::to_string(pi++) + "]"));
    if (e.is_ray()) {
      if (!je.contains("direction")) throw ParseError(w + ".direction: required for rays");
      e.direction = detail::point_field(je["direction"], fx.dim, w + ".direction");
    }
    if (je.contains("start")) e.hidden_start = detail::hidden_field(je["start"], fx.dim, w + ".start");
    if (je.contains("end")) e.hidden_end = detail::hidden_field(je["end"], fx.dim, w + ".end");
    fx.edges.push_back(std::move(e));
  }
  if (j.contains("charts")) {
    std::size_t ci = 0;
    for (const auto& jc : j["charts"]) {
      std::string w = "charts[" + std::to_string(ci++) + "]";
      ChartSpec c;
      c.id = jc.value("id", w);
      c.edge = jc.at("edge").get<std::string>();
      c.from = detail::rat_field(jc.at("from"), w + ".from");
      c.to = detail::rat_field(jc.at("to"), w + ".to");
      if (jc.contains("t_a")) c.t_a = detail::rat_field(jc["t_a"], w + ".t_a");
      if (jc.contains("t_b")) c.t_b = detail::rat_field(jc["t_b"], w + ".t_b");
      bool found = false;
      for (const auto& e : fx.edges) found = found || e.id == c.edge;
      if (!found) throw ParseError(w + ".edge: unknown edge '" + c.edge + "'");
      fx.charts.push_back(std::move(c));
    }
  }
  validate_fixture(fx);
  return fx;
}

inline GraphFixture parse_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open fixture '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_fixture_text(ss.str());
}

/// Canonical text form; parse_fixture_text(dump_fixture(f)) reproduces f and
/// dumping again gives the same bytes. One edge per line.
inline std::string dump_fixture(const GraphFixture& fx) {
  auto pt = [](const Point& p) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : p) a.push_back(to_string(x));
    return a;
  };
  auto hidden = [&](const std::optional<HiddenEnd>& h) -> nlohmann::json {
    if (!h) return nullptr;
    HarnessScope scope;
    nlohmann::json hj;
    hj["truth"] = pt(h->endpoint.truth());
    hj["carrier"] = pt(h->carrier);
    nlohmann::json hulls = nlohmann::json::array();
    for (const auto& b : h->endpoint.explicit_hulls()) hulls.push_back({{"lo", pt(b.lo)}, {"hi", pt(b.hi)}});
    hj["hulls"] = hulls;
    return nlohmann::json{{"hidden", hj}};
  };
  std::ostringstream os;
  os << "{\n";
  os << "  \"name\": " << nlohmann::json(fx.name).dump() << ",\n";
  os << "  \"dim\": " << fx.dim << ",\n";
  os << "  \"tube\": " << nlohmann::json(to_string(fx.tube)).dump() << ",\n";
  os << "  \"edges\": [\n";
  for (std::size_t i = 0; i < fx.edges.size(); ++i) {
    const auto& e = fx.edges[i];
    nlohmann::json je;
    je["id"] = e.id;
    je["kind"] = to_string(e.kind);
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : e.points) pts.push_back(pt(p));
    je["points"] = pts;
    if (e.is_ray()) je["direction"] = pt(e.direction);
    je["start"] = hidden(e.hidden_start);
    je["end"] = hidden(e.hidden_end);
    os << "    " << je.dump() << (i + 1 < fx.edges.size() ? ",\n" : "\n");
  }
  os << "  ],\n";
  os << "  \"charts\": [\n";
  for (std::size_t i = 0; i < fx.charts.size(); ++i) {
    const auto& c = fx.charts[i];
    nlohmann::json jc{{"id", c.id},
                      {"edge", c.edge},
                      {"from", to_string(c.from)},
                      {"to", to_string(c.to)},
                      {"t_a", to_string(c.t_a)},
                      {"t_b", to_string(c.t_b)}};
    os << "    " << jc.dump() << (i + 1 < fx.charts.size() ? ",\n" : "\n");
  }
  os << "  ]\n}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Ground truth (test harness only)

/// x* as a computable point from hull emissions alone: the center of the
/// first hull whose half diagonal is below 2^-k.
inline ComputablePoint hull_point(const HiddenEndpoint& h, std::size_t dim) {
  return ComputablePoint(dim, [h, dim](unsigned k) {
    Rational bound = pow2(-static_cast<long>(k));
    for (unsigned s = 0;; ++s) {
      Box b = h.hull(s);
      if (GraphFixture::half_diag(dim) * b.max_half_width() < bound) return b.center();
    }
  });
}

namespace truth {

/// Exact segments of S (hidden tails end at the true endpoint).
inline std::vector<Capsule> segments(const GraphFixture& fx) {
  HarnessScope scope;
  std::vector<Capsule> out = fx.known_segments();
  for (const auto& e : fx.edges) {
    if (e.hidden_start) out.push_back({e.hidden_start->endpoint.truth(), e.points.front(), 0, false});
    if (e.hidden_end) out.push_back({e.points.back(), e.hidden_end->endpoint.truth(), 0, false});
  }
  return out;
}

inline Point endpoint(const HiddenEnd& h) {
  HarnessScope scope;
  return h.endpoint.truth();
}

/// Squared distance from p to S.
inline Rational dist2_to_set(const std::vector<Capsule>& segs, const Point& p) {
  Rational best = -1;
  for (const auto& c : segs) {
    Rational d = seg_point_dist2(c.a, c.b, p, c.ray);
    if (best < 0 || d < best) best = d;
  }
  return best;
}

/// Points of S at spacing h (every point of S within h of one), clipped to
/// the window [-R, R]^n when R > 0 (rays need a window).
inline std::vector<Point> samples(const std::vector<Capsule>& segs, const Rational& h, const Rational& window = 0) {
  std::vector<Point> out;
  for (const auto& c : segs) {
    Point b = c.b;
    if (c.ray) {
      if (window <= 0) throw std::invalid_argument("truth::samples: rays need a window");
      Rational len = sqrt_lower(dot(sub(c.b, c.a), sub(c.b, c.a)), 20);
      Rational t = (window * 2 * static_cast<long>(c.a.size()) + sqrt_upper(dot(c.a, c.a), 10)) / len + 1;
      b = add(c.a, scale(sub(c.b, c.a), t));
    }
    PolylinePath seg({c.a, b});
    for (auto& p : seg.sample(0, 1, h)) {
      bool in = true;
      if (window > 0)
        for (const auto& x : p) in = in && -window <= x && x <= window;
      if (in) out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace truth

}  // namespace semigraph
