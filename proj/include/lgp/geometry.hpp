#ifndef LGP_GEOMETRY_HPP
#define LGP_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lgp/error.hpp"

namespace lgp {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double euclidean_norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return euclidean_norm(b - a); }

/// Maps any angle onto [0, 2*pi).
inline double normalize_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Counterclockwise angular distance from `from` to `to`, in [0, 2*pi).
inline double ccw_span(double from, double to) { return normalize_angle(to - from); }

/// Planar p-norm cost on directions, p in [1, inf]. Position independent.
class Anisotropy {
 public:
  explicit Anisotropy(double p = 2.0) : p_(p) {
    if (!(p >= 1.0)) throw validation_error("anisotropy exponent must satisfy p >= 1");
  }

  static Anisotropy euclidean() { return Anisotropy(2.0); }
  static Anisotropy infinity() { return Anisotropy(std::numeric_limits<double>::infinity()); }

  double p() const noexcept { return p_; }
  bool is_infinity() const noexcept { return std::isinf(p_); }
  bool is_l1() const noexcept { return p_ == 1.0; }
  /// True when the unit ball has flat sides (p = 1 or p = inf).
  bool is_polyhedral() const noexcept { return is_l1() || is_infinity(); }

  double norm(Point v) const {
    const double ax = std::abs(v.x);
    const double ay = std::abs(v.y);
    if (is_infinity()) return std::max(ax, ay);
    if (p_ == 1.0) return ax + ay;
    if (p_ == 2.0) return std::hypot(ax, ay);
    const double hi = std::max(ax, ay);
    if (hi == 0.0) return 0.0;
    const double lo = std::min(ax, ay);
    return hi * std::pow(1.0 + std::pow(lo / hi, p_), 1.0 / p_);
  }

  /// Ellipticity constant: lower_bound() * |v| <= norm(v).
  double lower_bound() const { return std::min(1.0, std::pow(2.0, exponent_gap())); }
  /// Boundedness constant: norm(v) <= upper_bound() * |v|.
  double upper_bound() const { return std::max(1.0, std::pow(2.0, exponent_gap())); }

  std::string label() const {
    if (is_infinity()) return "inf";
    std::ostringstream out;
    out << p_;
    return out.str();
  }

  friend bool operator==(const Anisotropy&, const Anisotropy&) = default;

 private:
  double exponent_gap() const { return (is_infinity() ? 0.0 : 1.0 / p_) - 0.5; }

  double p_;
};

/// Minimal phi-perimeter of a curve joining a and b: the p-norm of b - a.
inline double chord_cost(Point a, Point b, const Anisotropy& aniso) { return aniso.norm(b - a); }

inline double polyline_cost(std::span<const Point> points, const Anisotropy& aniso) {
  if (points.size() < 2) throw validation_error("degenerate polyline");
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += chord_cost(points[i - 1], points[i], aniso);
  return total;
}

// ---------------------------------------------------------------------------
// Segment predicates

/// Sign of the turn a -> b -> c (positive for counterclockwise).
inline double orient(Point a, Point b, Point c) { return cross(b - a, c - a); }

inline double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + s * ab);
}

inline double segment_distance(Point a, Point b, Point c, Point d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

/// Closed segments [a,b] and [c,d] meet, allowing `slack` of separation.
inline bool segments_touch(Point a, Point b, Point c, Point d, double slack = 0.0) {
  return segment_distance(a, b, c, d) <= slack;
}

/// Interiors of [a,b] and [c,d] cross transversally.
inline bool segments_cross_properly(Point a, Point b, Point c, Point d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

struct BoundingBox {
  Point lo;
  Point hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double diameter() const { return std::hypot(width(), height()); }
};

// ---------------------------------------------------------------------------
// Domains

struct Circle {
  Point center;
  double radius = 1.0;
};

struct Ellipse {
  Point center;
  double semi_x = 1.0;
  double semi_y = 1.0;
};

/// Counterclockwise convex polygon parametrized by normalized arc length.
struct ConvexPolygon {
  std::vector<Point> vertices;
  std::vector<double> cumulative;  // arc length at each vertex, cumulative[0] = 0
  double perimeter = 0.0;
};

/// Strictly convex planar domain exposed through a counterclockwise
/// parametrization gamma(theta), theta in [0, 2*pi).
class ConvexDomain {
 public:
  static constexpr std::size_t kMinPolygonVertices = 64;

  static ConvexDomain circle(Point center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw validation_error("circle radius must be positive");
    return ConvexDomain(Circle{center, radius});
  }

  static ConvexDomain unit_disk() { return circle({0.0, 0.0}, 1.0); }

  static ConvexDomain ellipse(Point center, double semi_x, double semi_y) {
    if (!(semi_x > 0.0) || !(semi_y > 0.0) || !std::isfinite(semi_x) || !std::isfinite(semi_y))
      throw validation_error("ellipse semi-axes must be positive");
    return ConvexDomain(Ellipse{center, semi_x, semi_y});
  }

  static ConvexDomain polygon(std::vector<Point> vertices) {
    const std::size_t n = vertices.size();
    if (n < kMinPolygonVertices)
      throw validation_error("polygonal domain needs at least " + std::to_string(kMinPolygonVertices) + " vertices");
    double turning = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Point e0 = vertices[(i + 1) % n] - vertices[i];
      const Point e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
      if (!(cross(e0, e1) > 0.0)) throw validation_error("polygon is not strictly convex and counterclockwise");
      turning += std::atan2(cross(e0, e1), dot(e0, e1));
    }
    if (std::abs(turning - kTwoPi) > 1e-6) throw validation_error("polygon boundary is not simple");
    ConvexPolygon poly;
    poly.vertices = std::move(vertices);
    poly.cumulative.resize(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      poly.cumulative[i + 1] = poly.cumulative[i] + distance(poly.vertices[i], poly.vertices[(i + 1) % n]);
    poly.perimeter = poly.cumulative[n];
    return ConvexDomain(std::move(poly));
  }

  /// Regular n-gon inscribed in a circle, first vertex at angle 0.
  static ConvexDomain regular_polygon(Point center, double radius, std::size_t n) {
    std::vector<Point> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
      v[i] = {center.x + radius * std::cos(a), center.y + radius * std::sin(a)};
    }
    return polygon(std::move(v));
  }

  std::string kind() const {
    if (std::holds_alternative<Circle>(shape_)) return "circle";
    if (std::holds_alternative<Ellipse>(shape_)) return "ellipse";
    return "polygon";
  }

  const Circle* as_circle() const { return std::get_if<Circle>(&shape_); }
  const Ellipse* as_ellipse() const { return std::get_if<Ellipse>(&shape_); }
  const ConvexPolygon* as_polygon() const { return std::get_if<ConvexPolygon>(&shape_); }

  Point point(double theta) const {
    theta = normalize_angle(theta);
    if (const auto* c = as_circle()) return {c->center.x + c->radius * std::cos(theta), c->center.y + c->radius * std::sin(theta)};
    if (const auto* e = as_ellipse()) return {e->center.x + e->semi_x * std::cos(theta), e->center.y + e->semi_y * std::sin(theta)};
    const auto& p = std::get<ConvexPolygon>(shape_);
    const auto [edge, s] = polygon_locate(p, theta);
    const Point a = p.vertices[edge];
    const Point b = p.vertices[(edge + 1) % p.vertices.size()];
    return a + s * (b - a);
  }

  /// Unit normal pointing into the domain at gamma(theta).
  Point inward_normal(double theta) const {
    theta = normalize_angle(theta);
    if (as_circle()) return {-std::cos(theta), -std::sin(theta)};
    if (const auto* e = as_ellipse()) {
      const Point g{-std::cos(theta) / e->semi_x, -std::sin(theta) / e->semi_y};
      return (1.0 / euclidean_norm(g)) * g;
    }
    const auto& p = std::get<ConvexPolygon>(shape_);
    const std::size_t n = p.vertices.size();
    const auto [edge, s] = polygon_locate(p, theta);
    auto edge_normal = [&](std::size_t i) {
      const Point d = p.vertices[(i + 1) % n] - p.vertices[i];
      return (1.0 / euclidean_norm(d)) * Point{-d.y, d.x};
    };
    if (s > 0.0) return edge_normal(edge);
    const Point m = edge_normal(edge) + edge_normal((edge + n - 1) % n);
    return (1.0 / euclidean_norm(m)) * m;
  }

  /// Approximate signed distance to the boundary, positive inside.
  double depth(Point q) const {
    if (const auto* c = as_circle()) return c->radius - distance(q, c->center);
    if (const auto* e = as_ellipse()) {
      const double u = (q.x - e->center.x) / e->semi_x;
      const double v = (q.y - e->center.y) / e->semi_y;
      return (1.0 - std::hypot(u, v)) * std::min(e->semi_x, e->semi_y);
    }
    const auto& p = std::get<ConvexPolygon>(shape_);
    const std::size_t n = p.vertices.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = p.vertices[i];
      const Point d = p.vertices[(i + 1) % n] - a;
      best = std::min(best, cross(d, q - a) / euclidean_norm(d));
    }
    return best;
  }

  bool contains(Point q, double margin = 0.0) const { return depth(q) >= margin; }

  BoundingBox bounding_box() const {
    if (const auto* c = as_circle())
      return {{c->center.x - c->radius, c->center.y - c->radius}, {c->center.x + c->radius, c->center.y + c->radius}};
    if (const auto* e = as_ellipse())
      return {{e->center.x - e->semi_x, e->center.y - e->semi_y}, {e->center.x + e->semi_x, e->center.y + e->semi_y}};
    const auto& p = std::get<ConvexPolygon>(shape_);
    BoundingBox box{p.vertices.front(), p.vertices.front()};
    for (const Point& v : p.vertices) {
      box.lo = {std::min(box.lo.x, v.x), std::min(box.lo.y, v.y)};
      box.hi = {std::max(box.hi.x, v.x), std::max(box.hi.y, v.y)};
    }
    return box;
  }

  /// Radius of a disk certainly contained in the domain.
  double inradius() const {
    if (const auto* c = as_circle()) return c->radius;
    if (const auto* e = as_ellipse()) return std::min(e->semi_x, e->semi_y);
    const auto& p = std::get<ConvexPolygon>(shape_);
    Point centroid;
    for (const Point& v : p.vertices) centroid = centroid + v;
    centroid = (1.0 / static_cast<double>(p.vertices.size())) * centroid;
    return depth(centroid);
  }

  /// Area enclosed between the counterclockwise boundary arc from `from` to
  /// `to` and the chord joining its endpoints.
  double segment_area(double from, double to) const {
    const double span = ccw_span(from, to);
    if (const auto* c = as_circle()) return 0.5 * c->radius * c->radius * (span - std::sin(span));
    if (const auto* e = as_ellipse()) return 0.5 * e->semi_x * e->semi_y * (span - std::sin(span));
    const auto& p = std::get<ConvexPolygon>(shape_);
    const std::size_t n = p.vertices.size();
    std::vector<Point> ring{point(from)};
    const double total = p.perimeter;
    const double s0 = normalize_angle(from) / kTwoPi * total;
    const double s1 = s0 + span / kTwoPi * total;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const double s = p.cumulative[k % n] + (k >= n ? total : 0.0);
      if (s > s0 && s < s1) ring.push_back(p.vertices[k % n]);
    }
    ring.push_back(point(to));
    double twice = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) twice += cross(ring[i], ring[(i + 1) % ring.size()]);
    return 0.5 * twice;
  }

  double area() const {
    if (const auto* c = as_circle()) return std::numbers::pi * c->radius * c->radius;
    if (const auto* e = as_ellipse()) return std::numbers::pi * e->semi_x * e->semi_y;
    const auto& p = std::get<ConvexPolygon>(shape_);
    double twice = 0.0;
    for (std::size_t i = 0; i < p.vertices.size(); ++i)
      twice += cross(p.vertices[i], p.vertices[(i + 1) % p.vertices.size()]);
    return 0.5 * twice;
  }

  /// Intersection of the horizontal line at height y with the closed domain.
  std::optional<std::pair<double, double>> horizontal_extent(double y) const {
    if (const auto* c = as_circle()) {
      const double dy = y - c->center.y;
      const double h2 = c->radius * c->radius - dy * dy;
      if (h2 < 0.0) return std::nullopt;
      const double h = std::sqrt(h2);
      return std::pair{c->center.x - h, c->center.x + h};
    }
    if (const auto* e = as_ellipse()) {
      const double v = (y - e->center.y) / e->semi_y;
      const double h2 = 1.0 - v * v;
      if (h2 < 0.0) return std::nullopt;
      const double h = e->semi_x * std::sqrt(h2);
      return std::pair{e->center.x - h, e->center.x + h};
    }
    const auto& p = std::get<ConvexPolygon>(shape_);
    const std::size_t n = p.vertices.size();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = p.vertices[i], b = p.vertices[(i + 1) % n];
      if ((a.y - y) * (b.y - y) > 0.0) continue;
      if (a.y == b.y) {
        lo = std::min({lo, a.x, b.x});
        hi = std::max({hi, a.x, b.x});
        continue;
      }
      const double x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (lo > hi) return std::nullopt;
    return std::pair{lo, hi};
  }

 private:
  using Shape = std::variant<Circle, Ellipse, ConvexPolygon>;

  explicit ConvexDomain(Shape shape) : shape_(std::move(shape)) {}

  static std::pair<std::size_t, double> polygon_locate(const ConvexPolygon& p, double theta) {
    const double s = theta / kTwoPi * p.perimeter;
    const auto it = std::upper_bound(p.cumulative.begin(), p.cumulative.end(), s);
    std::size_t edge = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - p.cumulative.begin()) - 1));
    edge = std::min(edge, p.vertices.size() - 1);
    const double len = p.cumulative[edge + 1] - p.cumulative[edge];
    return {edge, len > 0.0 ? (s - p.cumulative[edge]) / len : 0.0};
  }

  Shape shape_;
};

}  // namespace lgp

#endif  // LGP_GEOMETRY_HPP
