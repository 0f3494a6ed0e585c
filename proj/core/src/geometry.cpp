#include "macpp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "macpp/errors.hpp"

namespace macpp {
namespace {

bool lex_less(const Point& a, const Point& b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

// Monotone chain; pops on non-left turns so collinear points never survive.
std::vector<Point> monotone_chain(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point> hull;
  hull.reserve(2 * pts.size());
  for (const Point& p : pts) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  const std::size_t lower = hull.size() + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (hull.size() >= lower && cross(hull[hull.size() - 2], hull.back(), *it) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(*it);
  }
  hull.pop_back();
  return hull;
}

// Relative tolerance for on-edge tests: rounding in the cross product of
// nearly collinear points must not push hull vertices outside their own hull.
constexpr double kEdgeTolerance = 1e-12;

bool left_of_or_on(Point a, Point b, Point p) {
  const double c = cross(a, b, p);
  if (c >= 0.0) return true;
  const double scale = std::sqrt(squared_norm(b - a) * squared_norm(p - a));
  return c >= -kEdgeTolerance * scale;
}

double segment_distance(Point a, Point b, Point p) {
  const Point ab = b - a;
  const Point ap = p - a;
  const double len2 = squared_norm(ab);
  double t = len2 > 0.0 ? (ap.x * ab.x + ap.y * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Point q = a + t * ab;
  return std::sqrt(squared_norm(p - q));
}

// Sutherland-Hodgman clip of a convex ring against the half-plane left of a->b.
std::vector<Point> clip_half_plane(const std::vector<Point>& ring, Point a, Point b) {
  std::vector<Point> out;
  if (ring.empty()) return out;
  out.reserve(ring.size() + 1);
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point cur = ring[i];
    const Point nxt = ring[(i + 1) % ring.size()];
    const double dc = cross(a, b, cur);
    const double dn = cross(a, b, nxt);
    if (dc >= 0.0) out.push_back(cur);
    if ((dc >= 0.0) != (dn >= 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

}  // namespace

Rectangle::Rectangle(double xmin, double xmax, double ymin, double ymax)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {
  if (!(xmin < xmax) || !(ymin < ymax) || !std::isfinite(xmin) || !std::isfinite(xmax) ||
      !std::isfinite(ymin) || !std::isfinite(ymax)) {
    throw DegenerateInput("rectangle needs finite xmin < xmax and ymin < ymax");
  }
}

ConvexPolygon::ConvexPolygon(std::vector<Point> vertices) {
  for (const Point& p : vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DegenerateInput("polygon vertex is not finite");
    }
  }
  // Drop consecutive (cyclic) duplicates.
  std::vector<Point> ring;
  for (const Point& p : vertices) {
    if (ring.empty() || !(ring.back() == p)) ring.push_back(p);
  }
  while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3) throw DegenerateInput("polygon needs at least 3 distinct vertices");

  if (signed_area(ring) < 0.0) std::reverse(ring.begin(), ring.end());
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(ring[i], ring[(i + 1) % n], ring[(i + 2) % n]) <= 0.0) {
      throw DegenerateInput("polygon is not strictly convex at vertex " +
                            std::to_string((i + 1) % n));
    }
  }
  const auto first = std::min_element(ring.begin(), ring.end(), lex_less);
  std::rotate(ring.begin(), first, ring.end());
  // Star polygons pass the turn test; a convex ring is its own hull in order.
  if (monotone_chain(ring) != ring) {
    throw DegenerateInput("polygon is self-intersecting");
  }
  vertices_ = std::move(ring);
}

double signed_area(std::span<const Point> ring) {
  double twice = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

std::vector<Point> boundary_vertices(const Window& w) {
  if (const auto* r = w.rectangle()) {
    return {{r->xmin(), r->ymin()}, {r->xmax(), r->ymin()}, {r->xmax(), r->ymax()},
            {r->xmin(), r->ymax()}};
  }
  const auto v = w.polygon()->vertices();
  return {v.begin(), v.end()};
}

double area(const Window& w) {
  if (const auto* r = w.rectangle()) return r->width() * r->height();
  return signed_area(w.polygon()->vertices());
}

bool contains(const Window& w, Point p) {
  if (const auto* r = w.rectangle()) {
    return p.x >= r->xmin() && p.x <= r->xmax() && p.y >= r->ymin() && p.y <= r->ymax();
  }
  const auto v = w.polygon()->vertices();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!left_of_or_on(v[i], v[(i + 1) % n], p)) return false;
  }
  return true;
}

Rectangle bounding_box(std::span<const Point> points) {
  if (points.empty()) throw DegenerateInput("bounding box of an empty point set");
  double xmin = points[0].x, xmax = points[0].x, ymin = points[0].y, ymax = points[0].y;
  for (const Point& p : points) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return Rectangle(xmin, xmax, ymin, ymax);
}

Rectangle bounding_box(const Window& w) {
  if (const auto* r = w.rectangle()) return *r;
  return bounding_box(w.polygon()->vertices());
}

Window translate(const Window& w, Point v) {
  if (const auto* r = w.rectangle()) {
    return Rectangle(r->xmin() + v.x, r->xmax() + v.x, r->ymin() + v.y, r->ymax() + v.y);
  }
  std::vector<Point> moved;
  for (const Point& p : w.polygon()->vertices()) moved.push_back(p + v);
  return ConvexPolygon(std::move(moved));
}

double distance_to_boundary(const Window& w, Point p) {
  if (const auto* r = w.rectangle()) {
    return std::min({p.x - r->xmin(), r->xmax() - p.x, p.y - r->ymin(), r->ymax() - p.y});
  }
  const auto v = w.polygon()->vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, segment_distance(v[i], v[(i + 1) % v.size()], p));
  }
  return best;
}

double overlap_area(const Window& w, Point v) {
  if (const auto* r = w.rectangle()) {
    const double dx = std::max(0.0, r->width() - std::abs(v.x));
    const double dy = std::max(0.0, r->height() - std::abs(v.y));
    return dx * dy;
  }
  const auto clip = w.polygon()->vertices();
  std::vector<Point> ring;
  for (const Point& p : clip) ring.push_back(p + v);
  for (std::size_t i = 0; i < clip.size() && !ring.empty(); ++i) {
    ring = clip_half_plane(ring, clip[i], clip[(i + 1) % clip.size()]);
  }
  return ring.size() < 3 ? 0.0 : std::max(0.0, signed_area(ring));
}

ConvexPolygon convex_hull(std::span<const Point> points) {
  std::vector<Point> hull = monotone_chain({points.begin(), points.end()});
  if (hull.size() < 3) {
    throw DegenerateInput("convex hull needs at least 3 non-collinear points");
  }
  return ConvexPolygon(std::move(hull));
}

}  // namespace macpp
