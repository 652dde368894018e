#ifndef LGP_REGION_HPP
#define LGP_REGION_HPP

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "lgp/geometry.hpp"
#include "lgp/matching.hpp"

namespace lgp {

/// Points closer than this to a region's interior boundary count as inside.
inline constexpr double kClosureTolerance = 1e-9;

using Segment = std::pair<Point, Point>;

/// The superlevel set described by one LevelMatching: the part of the domain
/// on the high side of its curves.
///
/// Membership is decided by the parity of crossings between the segment
/// [x, anchor] and the curves, where the anchor is a boundary point on a high
/// arc. Since the domain is convex, that segment never meets the boundary arcs
/// except at the anchor, so arcs never need to be discretized.
class SuperlevelRegion {
 public:
  SuperlevelRegion() = default;

  SuperlevelRegion(const LevelMatching& m, const ConvexDomain& domain) : level_(m.level), area_(m.enclosed_area) {
    const auto& cs = m.crossings.crossings;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (cs[i].direction != Direction::up) continue;
      const double from = cs[i].theta;
      const double to = cs[(i + 1) % cs.size()].theta;
      const double mid = normalize_angle(from + 0.5 * ccw_span(from, to));
      arc_midpoints_.push_back(domain.point(mid));
      arc_normals_.push_back(domain.inward_normal(mid));
    }
    if (!arc_midpoints_.empty()) anchor_ = arc_midpoints_.front();
    for (const Polyline& c : m.curves) {
      for (std::size_t k = 1; k < c.size(); ++k) {
        // Consecutive segments of one curve share a chunk.
        if ((k - 1) % kChunkSize == 0) chunks_.push_back({c[k - 1], c[k - 1], segments_.size(), segments_.size()});
        Chunk& chunk = chunks_.back();
        chunk.lo = {std::min(chunk.lo.x, c[k].x), std::min(chunk.lo.y, c[k].y)};
        chunk.hi = {std::max(chunk.hi.x, c[k].x), std::max(chunk.hi.y, c[k].y)};
        segments_.emplace_back(c[k - 1], c[k]);
        chunk.end = segments_.size();
      }
      curves_.push_back(c);
    }
  }

  double level() const noexcept { return level_; }
  double area() const noexcept { return area_; }
  bool empty() const noexcept { return arc_midpoints_.empty(); }
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const std::vector<Polyline>& curves() const noexcept { return curves_; }

  /// Membership for a point of the closed domain.
  bool contains(Point x) const {
    if (empty()) return false;
    for (const Chunk& chunk : chunks_) {
      if (!chunk.overlaps(x, x, kClosureTolerance)) continue;
      for (std::size_t k = chunk.begin; k < chunk.end; ++k)
        if (point_segment_distance(x, segments_[k].first, segments_[k].second) <= kClosureTolerance) return true;
    }
    const Point lo{std::min(x.x, anchor_.x), std::min(x.y, anchor_.y)};
    const Point hi{std::max(x.x, anchor_.x), std::max(x.y, anchor_.y)};
    bool inside = true;
    for (const Chunk& chunk : chunks_) {
      if (!chunk.overlaps(lo, hi, 0.0)) continue;
      for (std::size_t k = chunk.begin; k < chunk.end; ++k) {
        const auto& [c, d] = segments_[k];
        const bool c_left = orient(x, anchor_, c) > 0.0;
        const bool d_left = orient(x, anchor_, d) > 0.0;
        if (c_left == d_left) continue;
        const double sx = orient(c, d, x);
        const double sa = orient(c, d, anchor_);
        if ((sx > 0.0 && sa < 0.0) || (sx < 0.0 && sa > 0.0)) inside = !inside;
      }
    }
    return inside;
  }

  /// Whether this region lies inside `outer`, checked by probing both sides
  /// of every curve and just inside every high arc.
  bool nested_within(const SuperlevelRegion& outer, const ConvexDomain& domain) const {
    if (empty()) return true;
    if (outer.empty()) return false;
    if (curves_ == outer.curves_ && arc_midpoints_.size() == outer.arc_midpoints_.size()) return true;
    for (const Chunk& mine : chunks_)
      for (const Chunk& theirs : outer.chunks_) {
        if (!mine.overlaps(theirs.lo, theirs.hi, 0.0)) continue;
        for (std::size_t i = mine.begin; i < mine.end; ++i)
          for (std::size_t j = theirs.begin; j < theirs.end; ++j)
            if (segments_cross_properly(segments_[i].first, segments_[i].second, outer.segments_[j].first,
                                        outer.segments_[j].second))
              return false;
      }
    const double eps = 1e-6 * std::max(1.0, domain.bounding_box().diameter());
    auto probe_ok = [&](Point q) {
      if (!domain.contains(q)) return true;
      return !contains(q) || outer.contains(q);
    };
    for (std::size_t i = 0; i < arc_midpoints_.size(); ++i)
      if (!probe_ok(arc_midpoints_[i] + eps * arc_normals_[i])) return false;
    auto probe_segments = [&](const std::vector<Segment>& segs) {
      for (const auto& [a, b] : segs) {
        const Point d = b - a;
        const double len = euclidean_norm(d);
        if (len == 0.0) continue;
        const Point n{-d.y / len, d.x / len};
        const Point mid = 0.5 * (a + b);
        if (!probe_ok(mid + eps * n) || !probe_ok(mid - eps * n)) return false;
      }
      return true;
    };
    return probe_segments(segments_) && probe_segments(outer.segments_);
  }

 private:
  static constexpr std::size_t kChunkSize = 16;

  /// Bounding box of a run of consecutive segments.
  struct Chunk {
    Point lo, hi;
    std::size_t begin = 0, end = 0;

    bool overlaps(Point qlo, Point qhi, double slack) const {
      return qlo.x <= hi.x + slack && lo.x <= qhi.x + slack && qlo.y <= hi.y + slack && lo.y <= qhi.y + slack;
    }
  };

  double level_ = 0.0;
  double area_ = 0.0;
  Point anchor_;
  std::vector<Point> arc_midpoints_;
  std::vector<Point> arc_normals_;
  std::vector<Segment> segments_;
  std::vector<Chunk> chunks_;
  std::vector<Polyline> curves_;
};

}  // namespace lgp

#endif  // LGP_REGION_HPP
