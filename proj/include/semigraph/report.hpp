#pragma once

// Rendering a graph approximation: a JSON run report with exact rationals, an
// SVG drawing of S and T, and a CSV table of T's endpoints.

#include "semigraph/approx.hpp"

#include <json.hpp>

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace semigraph {

namespace detail {

inline nlohmann::ordered_json point_json(const Point& p) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& x : p) a.push_back(to_string(x));
  return a;
}

inline nlohmann::ordered_json box_json(const Box& b) {
  return {{"lo", point_json(b.lo)}, {"hi", point_json(b.hi)}};
}

inline const std::optional<HiddenEnd>& hidden_of(const Edge& e, bool at_start) {
  return at_start ? e.hidden_start : e.hidden_end;
}

}  // namespace detail

/// The run report. Every value is exact; timings are left out so that equal
/// inputs give equal bytes.
inline nlohmann::ordered_json report_json(const GraphApproxReport& rep, const GraphFixture& fx, unsigned precision) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["fixture"] = rep.fixture;
  j["dim"] = fx.dim;
  j["epsilon"] = to_string(rep.eps);
  j["precision"] = precision;
  j["windowed"] = rep.windowed;
  j["window"] = to_string(rep.window);
  j["t_equals_s"] = rep.t_equals_s;

  auto edges = ordered_json::array();
  for (std::size_t u = 0; u < rep.edges.size(); ++u) {
    const auto& er = rep.edges[u];
    const Edge& e = fx.edge(er.id);
    ordered_json ej;
    ej["id"] = er.id;
    ej["kind"] = to_string(er.kind);
    ej["case"] = er.case_tag;
    for (bool at_start : {true, false}) {
      const auto& pt = at_start ? er.start : er.end;
      ordered_json end;
      if (!pt) {
        end = nullptr;
      } else {
        end["cut"] = at_start ? er.start_cut : er.end_cut;
        end["approx"] = detail::point_json(point_approx(*pt, precision));
        const auto& h = detail::hidden_of(e, at_start);
        if (h) end["replaces_hull"] = detail::box_json(h->endpoint.hull(precision));
      }
      ej[at_start ? "start" : "end"] = end;
    }
    ej["sample_count"] = er.set.approx(std::min(precision, 8u)).size();
    edges.push_back(ej);
  }
  j["edges"] = edges;

  auto cuts = ordered_json::array();
  for (const auto& c : rep.cuts) {
    cuts.push_back({{"edge", c.edge},
                    {"end", c.end},
                    {"case", c.case_tag},
                    {"tau_lo", to_string(c.tau_lo)},
                    {"tau_hi", to_string(c.tau_hi)},
                    {"tau_t", to_string(c.tau_t)},
                    {"delta", to_string(c.delta)},
                    {"carrier_length_upper", to_string(c.l_hi)},
                    {"removed_diameter_upper", to_string(c.removed_diam_upper)},
                    {"chain_links", c.chain_links}});
  }
  j["cuts"] = cuts;

  ordered_json cert;
  cert["claim"] = rep.windowed ? "d_H(S n W, T n W) <= hausdorff_upper" : "d_H(S, T) <= hausdorff_upper";
  cert["epsilon"] = to_string(rep.eps);
  cert["hausdorff_upper"] = to_string(rep.hausdorff_upper);
  cert["holds"] = rep.certified;
  cert["basis"] = "T is a subset of S; each removed piece has diameter at most its removed_diameter_upper and "
                  "touches the new endpoint";
  j["certificate"] = cert;

  auto seqs = ordered_json::array();
  for (const auto& s : rep.sequences) {
    auto sizes = ordered_json::array();
    for (std::size_t n = 0; n < s->generated(); ++n) sizes.push_back(s->generated_stage(n).l.size());
    seqs.push_back({{"stages", s->generated()}, {"links", sizes}, {"fuel", s->fuel().used()}});
  }
  j["sequences"] = seqs;
  j["fuel"] = {{"main", rep.fuel_used}, {"total", rep.total_fuel()}};
  return j;
}

/// One row per endpoint of T.
inline std::string report_csv(const GraphApproxReport& rep, unsigned precision) {
  std::ostringstream out;
  std::size_t dim = 0;
  for (const auto& er : rep.edges)
    for (const auto* pt : {&er.start, &er.end})
      if (*pt) dim = (*pt)->dim();
  out << "edge,kind,case,end,cut";
  for (std::size_t i = 0; i < dim; ++i) out << ",x" << i;
  out << "\n";
  for (const auto& er : rep.edges) {
    for (bool at_start : {true, false}) {
      const auto& pt = at_start ? er.start : er.end;
      if (!pt) continue;
      out << er.id << "," << to_string(er.kind) << "," << er.case_tag << "," << (at_start ? "start" : "end") << ","
          << ((at_start ? er.start_cut : er.end_cut) ? 1 : 0);
      for (const auto& x : point_approx(*pt, precision)) out << "," << to_string(x);
      out << "\n";
    }
  }
  return out.str();
}

namespace detail {

class SvgCanvas {
public:
  SvgCanvas(double x0, double y0, double x1, double y1, double width = 800, double margin = 24)
      : x0_(x0), y1_(y1), margin_(margin) {
    double span = std::max(x1 - x0, y1 - y0);
    scale_ = span > 0 ? (width - 2 * margin) / span : 1;
    w_ = (x1 - x0) * scale_ + 2 * margin;
    h_ = (y1 - y0) * scale_ + 2 * margin;
  }

  std::string xy(const Point& p) const { return num(px(p)) + "," + num(py(p)); }
  double px(const Point& p) const { return (p[0].get_d() - x0_) * scale_ + margin_; }
  double py(const Point& p) const { return (y1_ - (p.size() > 1 ? p[1].get_d() : 0.0)) * scale_ + margin_; }
  double len(const Rational& r) const { return r.get_d() * scale_; }
  double width() const { return w_; }
  double height() const { return h_; }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
  }

private:
  double x0_, y1_, margin_, scale_ = 1, w_ = 0, h_ = 0;
};

inline std::string point_key(const Point& p) {
  std::string k;
  for (const auto& x : p) k += to_string(x) + ";";
  return k;
}

}  // namespace detail

/// S in a light stroke with filled known vertices and empty circles (plus the
/// current hull box) for hidden endpoints; T on top with its endpoints
/// filled. Each edge and each distinct endpoint of S and of T is drawn by
/// exactly one element, identified by its id. Only the first two
/// coordinates are drawn.
inline std::string report_svg(const GraphApproxReport& rep, const GraphFixture& fx, unsigned precision) {
  using detail::SvgCanvas;
  auto hull_of = [&](const HiddenEnd& h) { return h.endpoint.hull(precision); };
  auto ray_end = [&](const Edge& e) -> std::optional<Point> {
    if (!detail::in_window(e.points.back(), rep.window)) return std::nullopt;
    Rational t = detail::ray_exit(e.points.back(), e.direction, rep.window);
    if (t <= 0) return std::nullopt;
    return add(e.points.back(), scale(e.direction, t));
  };

  // S polylines.
  std::vector<std::pair<std::string, std::vector<Point>>> s_edges;
  for (const auto& e : fx.edges) {
    std::vector<Point> pts;
    if (e.hidden_start) pts.push_back(hull_of(*e.hidden_start).center());
    pts.insert(pts.end(), e.points.begin(), e.points.end());
    if (e.hidden_end) pts.push_back(hull_of(*e.hidden_end).center());
    if (e.is_ray())
      if (auto p = ray_end(e)) pts.push_back(*p);
    s_edges.emplace_back(e.id, std::move(pts));
  }
  // T polylines.
  std::vector<std::pair<std::string, std::vector<Point>>> t_edges;
  std::vector<Point> t_vertices;
  std::map<std::string, bool> t_seen;
  auto add_t_vertex = [&](const Point& p) {
    if (t_seen.emplace(detail::point_key(p), true).second) t_vertices.push_back(p);
  };
  for (const auto& er : rep.edges) {
    const Edge& e = fx.edge(er.id);
    std::vector<Point> pts;
    if (er.start_cut) pts.push_back(point_approx(*er.start, precision));
    pts.insert(pts.end(), e.points.begin(), e.points.end());
    if (er.end_cut) pts.push_back(point_approx(*er.end, precision));
    if (e.is_ray())
      if (auto p = ray_end(e)) pts.push_back(*p);
    if (er.start) add_t_vertex(er.start_cut ? pts.front() : e.points.front());
    if (er.end) add_t_vertex(er.end_cut ? pts.back() : e.points.back());
    t_edges.emplace_back(er.id, std::move(pts));
  }
  // S vertices.
  std::vector<Point> s_vertices;
  std::map<std::string, bool> s_seen;
  std::vector<std::tuple<std::string, std::string, Box>> s_hidden;
  for (const auto& e : fx.edges) {
    for (bool at_start : {true, false}) {
      const auto& h = detail::hidden_of(e, at_start);
      if (h) {
        s_hidden.emplace_back(e.id, at_start ? "start" : "end", hull_of(*h));
        continue;
      }
      if (!at_start && e.is_ray()) continue;
      const Point& p = at_start ? e.points.front() : e.points.back();
      if (s_seen.emplace(detail::point_key(p), true).second) s_vertices.push_back(p);
    }
  }

  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  auto grow = [&](const Point& p) {
    double x = p[0].get_d(), y = p.size() > 1 ? p[1].get_d() : 0.0;
    x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
  };
  for (const auto& [id, pts] : s_edges)
    for (const auto& p : pts) grow(p);
  for (const auto& [id, end, b] : s_hidden) grow(b.lo), grow(b.hi);
  SvgCanvas cv(x0, y0, x1, y1);
  double dot = 4;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << SvgCanvas::num(cv.width()) << "\" height=\""
    << SvgCanvas::num(cv.height()) << "\">\n";
  o << "<title>" << rep.fixture << " eps=" << to_string(rep.eps) << "</title>\n";
  o << "<g id=\"S\" fill=\"none\" stroke=\"#b8b8b8\" stroke-width=\"6\" stroke-linecap=\"round\">\n";
  for (const auto& [id, pts] : s_edges) {
    o << "<polyline class=\"S-edge\" id=\"S-edge-" << id << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) o << (i ? " " : "") << cv.xy(pts[i]);
    o << "\"/>\n";
  }
  o << "</g>\n<g id=\"T\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\">\n";
  for (const auto& [id, pts] : t_edges) {
    o << "<polyline class=\"T-edge\" id=\"T-edge-" << id << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) o << (i ? " " : "") << cv.xy(pts[i]);
    o << "\"/>\n";
  }
  o << "</g>\n<g id=\"S-endpoints\" stroke=\"#555555\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < s_vertices.size(); ++i)
    o << "<circle class=\"S-vertex\" id=\"S-vertex-" << i << "\" cx=\"" << SvgCanvas::num(cv.px(s_vertices[i]))
      << "\" cy=\"" << SvgCanvas::num(cv.py(s_vertices[i])) << "\" r=\"" << dot << "\" fill=\"#555555\"/>\n";
  for (const auto& [id, end, b] : s_hidden) {
    Point c = b.center();
    o << "<g class=\"S-hidden\" id=\"S-hidden-" << id << "-" << end << "\">"
      << "<rect x=\"" << SvgCanvas::num(cv.px(b.lo)) << "\" y=\"" << SvgCanvas::num(cv.py(b.hi)) << "\" width=\""
      << SvgCanvas::num(cv.len(b.hi[0] - b.lo[0])) << "\" height=\""
      << SvgCanvas::num(b.lo.size() > 1 ? cv.len(b.hi[1] - b.lo[1]) : 0.0)
      << "\" fill=\"none\" stroke-dasharray=\"3,2\"/>"
      << "<circle cx=\"" << SvgCanvas::num(cv.px(c)) << "\" cy=\"" << SvgCanvas::num(cv.py(c)) << "\" r=\"" << dot
      << "\" fill=\"white\"/></g>\n";
  }
  o << "</g>\n<g id=\"T-endpoints\" fill=\"#c0392b\">\n";
  for (std::size_t i = 0; i < t_vertices.size(); ++i)
    o << "<circle class=\"T-vertex\" id=\"T-vertex-" << i << "\" cx=\"" << SvgCanvas::num(cv.px(t_vertices[i]))
      << "\" cy=\"" << SvgCanvas::num(cv.py(t_vertices[i])) << "\" r=\"" << dot / 2 << "\"/>\n";
  o << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace semigraph
