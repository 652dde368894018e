#ifndef LGP_MATCHING_HPP
#define LGP_MATCHING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lgp/boundary.hpp"
#include "lgp/error.hpp"
#include "lgp/geometry.hpp"

namespace lgp {

/// Relative cost window inside which two matchings count as tied.
inline constexpr double kTieTolerance = 1e-9;
/// Upper bound on the number of optimal configurations reported per level.
inline constexpr std::size_t kMaxOptima = 64;

using IndexPair = std::pair<std::size_t, std::size_t>;
using Polyline = std::vector<Point>;

/// Boundary of one superlevel set inside the domain: a non-crossing pairing
/// of the level's crossings, realized by one curve per pair.
struct LevelMatching {
  double level = 0.0;
  CrossingSet crossings;
  std::vector<Point> points;     // gamma(theta) for each crossing
  std::vector<IndexPair> pairs;  // first < second, sorted by first
  std::vector<Polyline> curves;  // curves[k] runs from points[pairs[k].first] to points[pairs[k].second]
  double cost = 0.0;
  double enclosed_area = 0.0;

  bool straight() const {
    return std::all_of(curves.begin(), curves.end(), [](const Polyline& c) { return c.size() == 2; });
  }

  bool same_pairing(const LevelMatching& other) const { return pairs == other.pairs; }
};

struct OptimalMatchings {
  std::vector<LevelMatching> matchings;  // sorted by enclosed area, largest first
  double min_cost = 0.0;
  bool overflow = false;
};

namespace detail {

inline void require_well_formed(const CrossingSet& crossings) {
  if (!crossings.well_formed()) throw validation_error("malformed crossing set");
}

inline std::vector<Point> crossing_points(const CrossingSet& crossings, const ConvexDomain& domain) {
  std::vector<Point> pts;
  pts.reserve(crossings.size());
  for (const Crossing& c : crossings.crossings) pts.push_back(domain.point(c.theta));
  return pts;
}

/// Interval DP over the crossing sequence. best(i, j) is the cheapest
/// non-crossing perfect matching of the half-open run [i, j).
class MatchingTable {
 public:
  MatchingTable(std::span<const Point> points, const Anisotropy& aniso)
      : n_(points.size()), pair_cost_(n_ * n_, 0.0), best_((n_ + 1) * (n_ + 1), 0.0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = i + 1; k < n_; k += 2) pair_cost_[i * n_ + k] = chord_cost(points[i], points[k], aniso);
    for (std::size_t len = 2; len <= n_; len += 2) {
      for (std::size_t i = 0; i + len <= n_; ++i) {
        const std::size_t j = i + len;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = i + 1; k < j; k += 2) {
          const double c = pair_cost(i, k) + this->best(i + 1, k) + this->best(k + 1, j);
          if (c < best) best = c;
        }
        best_[i * (n_ + 1) + j] = best;
      }
    }
  }

  std::size_t size() const noexcept { return n_; }
  double pair_cost(std::size_t i, std::size_t k) const { return pair_cost_[i * n_ + k]; }
  double best(std::size_t i, std::size_t j) const { return i >= j ? 0.0 : best_[i * (n_ + 1) + j]; }
  double optimum() const { return best(0, n_); }

 private:
  std::size_t n_;
  std::vector<double> pair_cost_;
  std::vector<double> best_;
};

struct PartialMatching {
  double cost = 0.0;
  std::vector<IndexPair> pairs;
};

/// All matchings of [i, j) with cost at most `budget`, up to `cap` of them.
inline std::vector<PartialMatching> enumerate_within(const MatchingTable& table, std::size_t i, std::size_t j,
                                                     double budget, std::size_t cap, bool& overflow) {
  std::vector<PartialMatching> out;
  if (i >= j) {
    out.push_back({});
    return out;
  }
  for (std::size_t k = i + 1; k < j; k += 2) {
    const double c = table.pair_cost(i, k);
    const double rest = budget - c;
    if (table.best(i + 1, k) + table.best(k + 1, j) > rest) continue;
    const auto inner = enumerate_within(table, i + 1, k, rest - table.best(k + 1, j), cap, overflow);
    for (const auto& left : inner) {
      const auto outer = enumerate_within(table, k + 1, j, rest - left.cost, cap, overflow);
      for (const auto& right : outer) {
        if (out.size() >= cap) {
          overflow = true;
          return out;
        }
        PartialMatching m;
        m.cost = c + left.cost + right.cost;
        m.pairs.reserve(1 + left.pairs.size() + right.pairs.size());
        m.pairs.emplace_back(i, k);
        m.pairs.insert(m.pairs.end(), left.pairs.begin(), left.pairs.end());
        m.pairs.insert(m.pairs.end(), right.pairs.begin(), right.pairs.end());
        out.push_back(std::move(m));
      }
    }
  }
  return out;
}

inline double shoelace_term(const Polyline& line) {
  double twice = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) twice += cross(line[i - 1], line[i]);
  return 0.5 * twice;
}

}  // namespace detail

/// Area of the superlevel region bounded by the arcs where the datum is above
/// the level and by the matching's curves.
inline double enclosed_area(const LevelMatching& m, const ConvexDomain& domain) {
  const auto& cs = m.crossings.crossings;
  const std::size_t n = cs.size();
  if (n == 0) return 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (cs[i].direction != Direction::up) continue;
    const std::size_t next = (i + 1) % n;
    area += domain.segment_area(cs[i].theta, cs[next].theta) + 0.5 * cross(m.points[i], m.points[next]);
  }
  // Curves are traversed from their down-crossing end to their up-crossing end.
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const double term = detail::shoelace_term(m.curves[k]);
    area += cs[m.pairs[k].first].direction == Direction::down ? term : -term;
  }
  return area;
}

inline double matching_cost(const LevelMatching& m, const Anisotropy& aniso) {
  double total = 0.0;
  for (const Polyline& c : m.curves) total += polyline_cost(c, aniso);
  return total;
}

/// Builds a straight-chord LevelMatching for a given pairing.
inline LevelMatching make_matching(const CrossingSet& crossings, std::vector<Point> points, std::vector<IndexPair> pairs,
                                   const ConvexDomain& domain, const Anisotropy& aniso) {
  for (auto& p : pairs)
    if (p.first > p.second) std::swap(p.first, p.second);
  std::sort(pairs.begin(), pairs.end());
  LevelMatching m;
  m.level = crossings.level;
  m.crossings = crossings;
  m.points = std::move(points);
  m.pairs = std::move(pairs);
  for (const auto& [a, b] : m.pairs) m.curves.push_back({m.points[a], m.points[b]});
  m.cost = matching_cost(m, aniso);
  m.enclosed_area = enclosed_area(m, domain);
  return m;
}

/// Pairing is perfect, non-crossing (nested or disjoint index intervals) and
/// joins opposite directions.
inline bool is_valid_pairing(const CrossingSet& crossings, std::span<const IndexPair> pairs) {
  const std::size_t n = crossings.size();
  if (pairs.size() * 2 != n) return false;
  std::vector<int> seen(n, 0);
  for (const auto& [a, b] : pairs) {
    if (a >= n || b >= n || a == b) return false;
    if (++seen[a] > 1 || ++seen[b] > 1) return false;
    if (crossings.crossings[a].direction == crossings.crossings[b].direction) return false;
  }
  for (std::size_t x = 0; x < pairs.size(); ++x) {
    for (std::size_t y = x + 1; y < pairs.size(); ++y) {
      const auto [a, b] = std::minmax(pairs[x].first, pairs[x].second);
      const auto [c, d] = std::minmax(pairs[y].first, pairs[y].second);
      const bool c_in = a < c && c < b;
      const bool d_in = a < d && d < b;
      if (c_in != d_in) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Non-segment minimizers for polyhedral anisotropies

/// Whether curves other than the segment achieve the chord cost between a and b.
inline bool admits_non_segment_minimizer(Point a, Point b, const Anisotropy& aniso) {
  const double dx = std::abs(b.x - a.x), dy = std::abs(b.y - a.y);
  const double tol = 1e-12 * std::max(dx, dy);
  if (aniso.is_l1()) return dx > tol && dy > tol;
  if (aniso.is_infinity()) return std::abs(dx - dy) > tol;
  return false;
}

namespace detail {

/// Axis-aligned monotone staircase; `first_x` / `last_x` pick the axis of the
/// first and last move.
inline Polyline monotone_staircase(Point a, Point b, int k, bool first_x, bool last_x) {
  const Point d = b - a;
  const int first_moves = k + (first_x == last_x ? 1 : 0);
  const int other_moves = k;
  const Point first_step = first_x ? Point{d.x / first_moves, 0.0} : Point{0.0, d.y / first_moves};
  const Point other_step = first_x ? Point{0.0, d.y / other_moves} : Point{d.x / other_moves, 0.0};
  Polyline pts{a};
  Point cur = a;
  for (int i = 0; i < first_moves + other_moves; ++i) {
    cur = cur + (i % 2 == 0 ? first_step : other_step);
    pts.push_back(cur);
  }
  pts.back() = b;
  return pts;
}

enum class ZigPiece { rise, flat, fall };

/// Zigzag whose pieces have slope +1, 0 or -1 relative to the dominant axis.
inline Polyline slope_bounded_zigzag(Point a, Point b, int k, std::span<const std::pair<ZigPiece, double>> pattern) {
  const Point d = b - a;
  const bool along_x = std::abs(d.x) >= std::abs(d.y);
  const double du = along_x ? d.x : d.y;
  const double dv = along_x ? d.y : d.x;
  const double su = du >= 0.0 ? 1.0 : -1.0;
  const double h = std::abs(du) / k;
  const double r = dv / k;
  const double half = 0.5 * (h + std::abs(r));
  const double w_rise = 0.5 * (half + r);
  const double w_fall = 0.5 * (half - r);
  const double w_flat = h - w_rise - w_fall;
  auto to_plane = [&](double u, double v) { return along_x ? Point{su * u, v} : Point{v, su * u}; };
  Polyline pts{a};
  Point cur = a;
  for (int step = 0; step < k; ++step) {
    for (const auto& [piece, fraction] : pattern) {
      Point delta;
      switch (piece) {
        case ZigPiece::rise: delta = to_plane(fraction * w_rise, fraction * w_rise); break;
        case ZigPiece::flat: delta = to_plane(fraction * w_flat, 0.0); break;
        case ZigPiece::fall: delta = to_plane(fraction * w_fall, -fraction * w_fall); break;
      }
      if (delta.x == 0.0 && delta.y == 0.0) continue;
      cur = cur + delta;
      pts.push_back(cur);
    }
  }
  pts.back() = b;
  return pts;
}

using ZigPattern = std::vector<std::pair<ZigPiece, double>>;

inline const std::vector<ZigPattern>& zigzag_patterns() {
  using enum ZigPiece;
  static const std::vector<ZigPattern> patterns{
      {{rise, 1.0}, {flat, 1.0}, {fall, 1.0}},
      {{fall, 1.0}, {flat, 1.0}, {rise, 1.0}},
      {{rise, 1.0}, {fall, 1.0}, {flat, 1.0}},
      {{fall, 1.0}, {rise, 1.0}, {flat, 1.0}},
      {{flat, 1.0}, {rise, 1.0}, {fall, 1.0}},
      {{flat, 1.0}, {fall, 1.0}, {rise, 1.0}},
      {{rise, 0.5}, {flat, 1.0}, {fall, 1.0}, {rise, 0.5}},
      {{fall, 0.5}, {flat, 1.0}, {rise, 1.0}, {fall, 0.5}},
  };
  return patterns;
}

inline std::vector<Polyline> witness_variants(Point a, Point b, const Anisotropy& aniso, int k) {
  std::vector<Polyline> out;
  if (aniso.is_l1()) {
    for (bool first_x : {true, false})
      for (bool last_x : {false, true}) out.push_back(monotone_staircase(a, b, k, first_x, last_x));
  } else {
    for (const auto& pattern : zigzag_patterns()) out.push_back(slope_bounded_zigzag(a, b, k, pattern));
  }
  return out;
}

}  // namespace detail

/// A k-step curve joining the chord endpoints with the same phi-cost as the
/// chord: a monotone staircase for p = 1, a slope-bounded zigzag for p = inf.
inline Polyline staircase_witness(Point a, Point b, const Anisotropy& aniso, int k) {
  if (!aniso.is_polyhedral()) throw validation_error("anisotropy admits only segments");
  if (k < 1) throw validation_error("staircase needs at least one step");
  if (aniso.is_l1()) return detail::monotone_staircase(a, b, k, true, false);
  return detail::slope_bounded_zigzag(a, b, k, detail::zigzag_patterns().front());
}

/// Searches for a non-segment minimizer between a and b that stays inside the
/// domain and away from `obstacles`.
inline std::optional<Polyline> admissible_witness(Point a, Point b, const Anisotropy& aniso, const ConvexDomain& domain,
                                                  std::span<const Polyline> obstacles) {
  if (!aniso.is_polyhedral() || !admits_non_segment_minimizer(a, b, aniso)) return std::nullopt;
  const double target = chord_cost(a, b, aniso);
  const double length = distance(a, b);
  static constexpr std::array<int, 14> kSteps{1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 128, 256};
  for (int k : kSteps) {
    for (Polyline& candidate : detail::witness_variants(a, b, aniso, k)) {
      if (std::abs(polyline_cost(candidate, aniso) - target) > 1e-12 * (1.0 + target)) continue;
      bool ok = true;
      double bulge = 0.0;
      for (std::size_t i = 1; ok && i + 1 < candidate.size(); ++i) {
        ok = domain.contains(candidate[i], 1e-12);
        bulge = std::max(bulge, point_segment_distance(candidate[i], a, b));
      }
      if (!ok || bulge <= 1e-9 * length) continue;
      // The candidate stays within `bulge` of the chord, so only obstacle
      // segments that close can touch it.
      std::vector<std::pair<Point, Point>> near;
      for (const Polyline& other : obstacles)
        for (std::size_t j = 1; j < other.size(); ++j)
          if (segment_distance(a, b, other[j - 1], other[j]) <= bulge + 1e-12) near.emplace_back(other[j - 1], other[j]);
      for (std::size_t i = 1; ok && i < candidate.size(); ++i)
        for (std::size_t j = 0; ok && j < near.size(); ++j)
          ok = !segments_touch(candidate[i - 1], candidate[i], near[j].first, near[j].second, 1e-12);
      if (ok) return std::move(candidate);
    }
  }
  return std::nullopt;
}

/// Replaces every chord that admits one by an admissible non-segment
/// minimizer avoiding the other curves and `extra_obstacles`. Empty when no
/// chord could be replaced.
inline std::optional<LevelMatching> non_segment_realization(const LevelMatching& m, const ConvexDomain& domain,
                                                            const Anisotropy& aniso,
                                                            std::span<const Polyline> extra_obstacles = {}) {
  if (!aniso.is_polyhedral()) return std::nullopt;
  LevelMatching alt = m;
  bool replaced = false;
  for (std::size_t k = 0; k < alt.curves.size(); ++k) {
    const Point a = alt.curves[k].front(), b = alt.curves[k].back();
    std::vector<Polyline> obstacles(extra_obstacles.begin(), extra_obstacles.end());
    for (std::size_t j = 0; j < alt.curves.size(); ++j)
      if (j != k) obstacles.push_back(alt.curves[j]);
    if (auto w = admissible_witness(a, b, aniso, domain, obstacles)) {
      alt.curves[k] = std::move(*w);
      replaced = true;
    }
  }
  if (!replaced) return std::nullopt;
  alt.cost = matching_cost(alt, aniso);
  alt.enclosed_area = enclosed_area(alt, domain);
  return alt;
}

// ---------------------------------------------------------------------------
// Optimal matchings

namespace detail {

struct PairingSearch {
  std::vector<Point> points;
  std::vector<PartialMatching> pairings;
  double min_cost = 0.0;
  bool overflow = false;
};

inline PairingSearch near_optimal_pairings(const CrossingSet& crossings, const ConvexDomain& domain,
                                           const Anisotropy& aniso, double rel_tol, std::size_t cap) {
  require_well_formed(crossings);
  PairingSearch s;
  s.points = crossing_points(crossings, domain);
  const MatchingTable table(s.points, aniso);
  s.min_cost = table.optimum();
  const double budget = s.min_cost * (1.0 + rel_tol) + 1e-12 * (1.0 + s.min_cost);
  s.pairings = enumerate_within(table, 0, table.size(), budget, cap, s.overflow);
  return s;
}

}  // namespace detail

/// Minimum-cost non-crossing perfect matching; cost ties (relative
/// kTieTolerance) are broken by the largest enclosed area.
inline LevelMatching min_matching(const CrossingSet& crossings, const ConvexDomain& domain, const Anisotropy& aniso) {
  auto search = detail::near_optimal_pairings(crossings, domain, aniso, kTieTolerance, kMaxOptima);
  std::optional<LevelMatching> best;
  for (auto& p : search.pairings) {
    LevelMatching m = make_matching(crossings, search.points, std::move(p.pairs), domain, aniso);
    if (!best || m.enclosed_area > best->enclosed_area) best = std::move(m);
  }
  if (!best) throw invariant_error("matching search produced no candidate");
  return *std::move(best);
}

/// Every optimal boundary configuration within (1 + rel_tol) of the minimum:
/// each near-optimal pairing with straight chords and, for p in {1, inf},
/// its non-segment realization when one exists inside the domain.
inline OptimalMatchings enumerate_optimal(const CrossingSet& crossings, const ConvexDomain& domain,
                                          const Anisotropy& aniso, double rel_tol = 0.0, std::size_t cap = kMaxOptima) {
  if (!(rel_tol >= 0.0)) throw validation_error("relative tolerance must be nonnegative");
  auto search = detail::near_optimal_pairings(crossings, domain, aniso, rel_tol, cap);
  OptimalMatchings out;
  out.min_cost = search.min_cost;
  out.overflow = search.overflow;
  for (auto& p : search.pairings) {
    if (out.matchings.size() >= cap) {
      out.overflow = true;
      break;
    }
    LevelMatching m = make_matching(crossings, search.points, std::move(p.pairs), domain, aniso);
    std::optional<LevelMatching> alt = non_segment_realization(m, domain, aniso);
    out.matchings.push_back(std::move(m));
    if (alt) {
      if (out.matchings.size() >= cap) {
        out.overflow = true;
        break;
      }
      out.matchings.push_back(*std::move(alt));
    }
  }
  std::stable_sort(out.matchings.begin(), out.matchings.end(),
                   [](const LevelMatching& a, const LevelMatching& b) { return a.enclosed_area > b.enclosed_area; });
  return out;
}

}  // namespace lgp

#endif  // LGP_MATCHING_HPP
