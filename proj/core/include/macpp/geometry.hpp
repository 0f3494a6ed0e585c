#pragma once

#include <span>
#include <variant>
#include <vector>

namespace macpp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }

inline double squared_norm(Point v) { return v.x * v.x + v.y * v.y; }

/// z-component of (a - o) x (b - o); positive when o, a, b turn counterclockwise.
inline double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Axis-aligned rectangle [xmin, xmax] x [ymin, ymax].
class Rectangle {
 public:
  /// Throws DegenerateInput unless xmin < xmax and ymin < ymax.
  Rectangle(double xmin, double xmax, double ymin, double ymax);

  double xmin() const noexcept { return xmin_; }
  double xmax() const noexcept { return xmax_; }
  double ymin() const noexcept { return ymin_; }
  double ymax() const noexcept { return ymax_; }
  double width() const noexcept { return xmax_ - xmin_; }
  double height() const noexcept { return ymax_ - ymin_; }

  friend bool operator==(const Rectangle&, const Rectangle&) = default;

 private:
  double xmin_, xmax_, ymin_, ymax_;
};

/// Strictly convex polygon. Vertices are stored counterclockwise starting
/// from the lexicographically smallest one, whatever order they were given in.
class ConvexPolygon {
 public:
  /// Throws DegenerateInput for fewer than 3 distinct vertices, zero area,
  /// reflex or collinear vertices.
  explicit ConvexPolygon(std::vector<Point> vertices);

  std::span<const Point> vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

  friend bool operator==(const ConvexPolygon&, const ConvexPolygon&) = default;

 private:
  std::vector<Point> vertices_;
};

/// Observation window: a closed rectangle or convex polygon.
class Window {
 public:
  Window(Rectangle r) : shape_(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  Window(ConvexPolygon p) : shape_(std::move(p)) {}  // NOLINT(google-explicit-constructor)

  static Window unit_square() { return Rectangle(0.0, 1.0, 0.0, 1.0); }

  bool is_rectangle() const noexcept { return std::holds_alternative<Rectangle>(shape_); }
  const Rectangle* rectangle() const noexcept { return std::get_if<Rectangle>(&shape_); }
  const ConvexPolygon* polygon() const noexcept { return std::get_if<ConvexPolygon>(&shape_); }
  const std::variant<Rectangle, ConvexPolygon>& shape() const noexcept { return shape_; }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  std::variant<Rectangle, ConvexPolygon> shape_;
};

double area(const Window& w);

/// Closed-region membership: boundary points are inside.
bool contains(const Window& w, Point p);

Rectangle bounding_box(const Window& w);
Rectangle bounding_box(std::span<const Point> points);

/// Window shifted by v. Rectangles stay rectangles.
Window translate(const Window& w, Point v);

/// Distance from p to the nearest point of the window boundary. Only
/// meaningful for p inside w.
double distance_to_boundary(const Window& w, Point p);

/// Area of w intersected with w shifted by v. Zero when they do not overlap.
double overlap_area(const Window& w, Point v);

/// Vertices of the window counterclockwise (rectangles give their 4 corners).
std::vector<Point> boundary_vertices(const Window& w);

/// Shoelace area of a simple polygon given counterclockwise (signed).
double signed_area(std::span<const Point> ring);

/// Smallest convex polygon containing all points, collinear boundary points
/// dropped. Throws DegenerateInput when the points are all collinear or
/// fewer than 3 are distinct.
ConvexPolygon convex_hull(std::span<const Point> points);

}  // namespace macpp
