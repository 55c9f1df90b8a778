#pragma once

#include "semigraph/metric.hpp"

#include <functional>
#include <algorithm>
#include <map>
#include <memory>
#include <vector>

namespace semigraph {

/// A computable compact set: k -> finite set of rational points that is
/// 2^-k-close (Hausdorff) to the set. The matching union code places a ball of
/// radius 2^-k on every point, i.e. the points are the centers of [j_k].
class ComputableCompactSet {
public:
  using Approx = std::function<std::vector<Point>(unsigned)>;

  ComputableCompactSet() = default;
  ComputableCompactSet(std::size_t dim, Approx f)
      : dim_(dim), f_(std::move(f)), cache_(std::make_shared<std::map<unsigned, std::vector<Point>>>()) {}

  static ComputableCompactSet finite(std::vector<Point> pts) {
    std::size_t d = pts.front().size();
    return ComputableCompactSet(d, [pts = std::move(pts)](unsigned) { return pts; });
  }

  std::size_t dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(f_); }

  /// Memoized; the set is deterministic in k.
  const std::vector<Point>& approx(unsigned k) const {
    auto it = cache_->find(k);
    if (it != cache_->end()) return it->second;
    return cache_->emplace(k, f_(k)).first->second;
  }

  /// Rational upper bound on diam K: diam of the 2^-10 approximation + 2 * 2^-10.
  Rational diam_upper() const {
    return sqrt_upper(diam2_of(approx(10)), 20) + 2 * pow2(-10);
  }

  /// Exact squared diameter of a finite set (planar sets go through the hull).
  static Rational diam2_of(const std::vector<Point>& in) {
    std::vector<Point> pts = in;
    if (pts.size() > 64 && pts.front().size() == 2) pts = hull2(in);
    Rational best = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) best = rmax(best, dist2(pts[i], pts[j]));
    return best;
  }

  /// Andrew's monotone chain, exact.
  static std::vector<Point> hull2(std::vector<Point> p) {
    std::sort(p.begin(), p.end(), [](const Point& a, const Point& b) {
      return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return p;
    auto cross = [](const Point& o, const Point& a, const Point& b) -> Rational {
      return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Point> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
      h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
      while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
      h[k++] = p[i - 1];
    }
    h.resize(k - 1);
    return h;
  }

private:
  std::size_t dim_ = 0;
  Approx f_;
  std::shared_ptr<std::map<unsigned, std::vector<Point>>> cache_;
};

}  // namespace semigraph
