#ifndef LGP_DECOMPOSE_HPP
#define LGP_DECOMPOSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <tuple>
#include <utility>
#include <vector>

#include "lgp/error.hpp"
#include "lgp/geometry.hpp"
#include "lgp/matching.hpp"
#include "lgp/solver.hpp"

namespace lgp {

/// A curve joining two boundary points, splitting the domain in two. The
/// left side (with respect to the curve's direction) is the high side.
struct Separator {
  Polyline curve;
  Point left_reference;  // boundary point strictly on the left side

  /// Separator along `curve`, which must run from gamma(from) to gamma(to).
  static Separator along(const ConvexDomain& domain, double from, double to, Polyline curve) {
    if (curve.size() < 2) throw validation_error("degenerate polyline");
    const double mid = normalize_angle(to + 0.5 * ccw_span(to, from));
    return {std::move(curve), domain.point(mid)};
  }

  static Separator chord(const ConvexDomain& domain, double from, double to) {
    return along(domain, from, to, {domain.point(from), domain.point(to)});
  }

  bool left_of(Point x) const {
    if (curve.size() == 2) return orient(curve.front(), curve.back(), x) > 0.0;
    bool left = true;
    for (std::size_t k = 1; k < curve.size(); ++k) {
      const Point c = curve[k - 1], d = curve[k];
      if ((orient(x, left_reference, c) > 0.0) == (orient(x, left_reference, d) > 0.0)) continue;
      const double sx = orient(c, d, x), sr = orient(c, d, left_reference);
      if ((sx > 0.0 && sr < 0.0) || (sx < 0.0 && sr > 0.0)) left = !left;
    }
    return left;
  }

  /// Points just left and right of the curve near its middle.
  std::pair<Point, Point> probes(double offset) const {
    const std::size_t k = (curve.size() - 1) / 2;
    const Point a = curve[k], b = curve[k + 1];
    const Point d = b - a;
    const double len = euclidean_norm(d);
    const Point n{-d.y / len, d.x / len};
    const Point mid = 0.5 * (a + b);
    return {mid + offset * n, mid - offset * n};
  }
};

/// Edge between two regions across one separator: u jumps by `weight` from
/// region `low` to region `high`.
struct RegionEdge {
  std::size_t low = 0;
  std::size_t high = 0;
  double weight = 0.0;
  std::size_t separator = 0;
};

class RegionTree {
 public:
  /// Graph-only tree. Throws "non-tree adjacency" unless the edges form a
  /// spanning tree of `region_count` regions.
  static RegionTree make(std::size_t region_count, std::vector<RegionEdge> edges, std::size_t root = 0) {
    RegionTree tree;
    tree.region_count_ = region_count;
    tree.edges_ = std::move(edges);
    tree.root_ = root;
    tree.validate();
    return tree;
  }

  /// Geometric tree from disjoint separators with signed jumps (high side
  /// minus low side, high side on the left). Regions are the faces the
  /// separators cut the domain into; the root is the face with most cells.
  static RegionTree from_separators(const ConvexDomain& domain, const Anisotropy& aniso, GridSpec grid,
                                    std::vector<Separator> separators, const std::vector<double>& jumps,
                                    std::optional<double> threshold = {}) {
    if (jumps.size() != separators.size()) throw validation_error("one jump per separator required");
    grid.validate();
    RegionTree tree;
    tree.geometry_ = Geometry{domain, aniso, grid, std::move(separators), {}, {}};
    Geometry& g = *tree.geometry_;
    const double probe = 1e-6 * std::max(1.0, domain.bounding_box().diameter());

    auto face_of = [&](const Signature& sig) {
      auto [it, inserted] = g.faces.emplace(sig, g.faces.size());
      return it->second;
    };
    face_of(Signature(g.separators.size(), false));  // placeholder, removed below if unused

    std::vector<RegionEdge> edges;
    for (std::size_t s = 0; s < g.separators.size(); ++s) {
      const auto [left, right] = g.separators[s].probes(probe);
      Signature high = tree.signature(left), low = tree.signature(right);
      high[s] = true;
      low[s] = false;
      edges.push_back({face_of(low), face_of(high), jumps[s], s});
    }

    const SolutionField shape(domain, aniso, grid);
    g.cell_labels.assign(grid.width * grid.height, kOutside);
    for (std::size_t j = 0; j < grid.height; ++j)
      for (std::size_t i = 0; i < grid.width; ++i)
        if (shape.inside(i, j)) g.cell_labels[shape.index(i, j)] = face_of(tree.signature(shape.cell_center(i, j)));

    // Drop faces no probe or cell produced (only the placeholder can be one).
    std::vector<std::size_t> cells(g.faces.size(), 0);
    for (std::size_t label : g.cell_labels)
      if (label != kOutside) ++cells[label];
    std::vector<bool> used(g.faces.size(), false);
    for (const auto& e : edges) used[e.low] = used[e.high] = true;
    for (std::size_t f = 0; f < cells.size(); ++f) used[f] = used[f] || cells[f] > 0;
    std::vector<std::size_t> remap(g.faces.size(), kOutside);
    std::size_t next = 0;
    for (std::size_t f = 0; f < used.size(); ++f)
      if (used[f]) remap[f] = next++;
    std::map<Signature, std::size_t> faces;
    for (const auto& [sig, f] : g.faces)
      if (used[f]) faces.emplace(sig, remap[f]);
    g.faces = std::move(faces);
    for (auto& label : g.cell_labels)
      if (label != kOutside) label = remap[label];
    for (auto& e : edges) {
      e.low = remap[e.low];
      e.high = remap[e.high];
    }
    tree.cell_counts_.assign(next, 0);
    for (std::size_t f = 0; f < cells.size(); ++f)
      if (used[f]) tree.cell_counts_[remap[f]] = cells[f];

    tree.region_count_ = next;
    tree.edges_ = std::move(edges);
    tree.root_ = static_cast<std::size_t>(
        std::max_element(tree.cell_counts_.begin(), tree.cell_counts_.end()) - tree.cell_counts_.begin());
    double scale = 0.0;
    for (double w : jumps) scale = std::max(scale, std::abs(w));
    tree.threshold_ = threshold.value_or(1e-3 * std::max(scale, 1.0));
    tree.validate();
    return tree;
  }

  std::size_t region_count() const noexcept { return region_count_; }
  const std::vector<RegionEdge>& edges() const noexcept { return edges_; }
  std::size_t root() const noexcept { return root_; }
  double threshold() const noexcept { return threshold_; }
  bool has_geometry() const noexcept { return geometry_.has_value(); }
  const std::vector<Separator>& separators() const { return require_geometry().separators; }
  const std::vector<std::size_t>& cell_counts() const noexcept { return cell_counts_; }
  GridSpec grid() const { return require_geometry().grid; }
  const ConvexDomain& domain() const { return require_geometry().domain; }
  const Anisotropy& aniso() const { return require_geometry().aniso; }

  RegionTree rerooted(std::size_t root) const {
    if (root >= region_count_) throw validation_error("root index out of range");
    RegionTree copy = *this;
    copy.root_ = root;
    return copy;
  }

  /// Region containing x, by which side of every separator it lies on.
  std::size_t region_of(Point x) const {
    const auto r = find_region(x);
    if (!r) throw invariant_error("point lies in no known region");
    return *r;
  }

  std::optional<std::size_t> find_region(Point x) const {
    const auto& faces = require_geometry().faces;
    const auto it = faces.find(signature(x));
    if (it == faces.end()) return std::nullopt;
    return it->second;
  }

  std::size_t cell_region(std::size_t cell) const { return require_geometry().cell_labels[cell]; }

  /// Signed sum of edge weights along the path from the root to each region.
  std::vector<double> path_sums() const {
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency(region_count_);
    for (const auto& e : edges_) {
      adjacency[e.low].emplace_back(e.high, e.weight);
      adjacency[e.high].emplace_back(e.low, -e.weight);
    }
    std::vector<double> sums(region_count_, 0.0);
    std::vector<bool> seen(region_count_, false);
    std::queue<std::size_t> frontier;
    frontier.push(root_);
    seen[root_] = true;
    while (!frontier.empty()) {
      const std::size_t r = frontier.front();
      frontier.pop();
      for (const auto& [next, w] : adjacency[r]) {
        if (seen[next]) continue;
        seen[next] = true;
        sums[next] = sums[r] + w;
        frontier.push(next);
      }
    }
    return sums;
  }

  static constexpr std::size_t kOutside = static_cast<std::size_t>(-1);

 private:
  using Signature = std::vector<bool>;

  struct Geometry {
    ConvexDomain domain;
    Anisotropy aniso;
    GridSpec grid;
    std::vector<Separator> separators;
    std::map<Signature, std::size_t> faces;
    std::vector<std::size_t> cell_labels;
  };

  const Geometry& require_geometry() const {
    if (!geometry_) throw validation_error("region tree has no geometry");
    return *geometry_;
  }

  Signature signature(Point x) const {
    const auto& seps = geometry_->separators;
    Signature sig(seps.size());
    for (std::size_t s = 0; s < seps.size(); ++s) sig[s] = seps[s].left_of(x);
    return sig;
  }

  void validate() const {
    if (region_count_ == 0) throw validation_error("region tree needs at least one region");
    if (root_ >= region_count_) throw validation_error("root index out of range");
    std::vector<std::size_t> parent(region_count_);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& e : edges_) {
      if (e.low >= region_count_ || e.high >= region_count_) throw validation_error("edge endpoint out of range");
      const std::size_t a = find(e.low), b = find(e.high);
      if (a == b) throw invariant_error("non-tree adjacency");
      parent[a] = b;
    }
    if (edges_.size() + 1 != region_count_) throw invariant_error("non-tree adjacency");
  }

  std::size_t region_count_ = 0;
  std::vector<RegionEdge> edges_;
  std::size_t root_ = 0;
  double threshold_ = 0.0;
  std::vector<std::size_t> cell_counts_;
  std::optional<Geometry> geometry_;
};

namespace detail {

struct ChordRun {
  std::size_t first_level = 0;
  std::size_t last_level = 0;
  std::size_t curve = 0;  // index into the last level's curves
};

inline bool same_curve(const Polyline& a, const Polyline& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (distance(a[k], b[k]) > tol) return false;
  return true;
}

}  // namespace detail

/// Finds jump curves as curves shared by at least two consecutive kept
/// levels whose value gap reaches `jump_threshold` (default 1e-3 of the
/// datum range), and builds the tree of regions they cut the domain into.
inline RegionTree build_region_tree(const SolutionField& field, std::optional<double> jump_threshold = {}) {
  const auto& family_ptr = field.family();
  if (!family_ptr) throw validation_error("field has no level family");
  const SuperlevelFamily& family = *family_ptr;
  const double range = family.value_max - family.value_min;
  const double threshold = jump_threshold.value_or(1e-3 * range);
  if (!(threshold > 0.0)) throw validation_error("jump threshold must be positive");
  const double tol = 1e-9 * std::max(1.0, family.domain.bounding_box().diameter());

  std::vector<detail::ChordRun> finished;
  std::vector<detail::ChordRun> open;
  for (std::size_t k = 0; k < family.levels.size(); ++k) {
    const auto& curves = family.levels[k].matching.curves;
    std::vector<detail::ChordRun> next;
    std::vector<bool> continued(open.size(), false);
    for (std::size_t c = 0; c < curves.size(); ++c) {
      detail::ChordRun run{k, k, c};
      for (std::size_t o = 0; o < open.size(); ++o) {
        if (continued[o]) continue;
        if (detail::same_curve(family.levels[k - 1].matching.curves[open[o].curve], curves[c], tol)) {
          run.first_level = open[o].first_level;
          continued[o] = true;
          break;
        }
      }
      next.push_back(run);
    }
    for (std::size_t o = 0; o < open.size(); ++o)
      if (!continued[o]) finished.push_back(open[o]);
    open = std::move(next);
  }
  finished.insert(finished.end(), open.begin(), open.end());
  std::sort(finished.begin(), finished.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first_level, a.last_level, a.curve) < std::tie(b.first_level, b.last_level, b.curve);
  });

  std::vector<Separator> separators;
  std::vector<double> jumps;
  for (const auto& run : finished) {
    if (run.last_level == run.first_level) continue;
    const LevelSet& top = family.levels[run.last_level];
    const double below = run.first_level == 0 ? family.value_min : family.levels[run.first_level - 1].level();
    const double weight = top.level() - below;
    if (weight < threshold) continue;
    const auto [i, j] = top.matching.pairs[run.curve];
    const auto& cs = top.matching.crossings.crossings;
    Separator sep = Separator::along(family.domain, cs[i].theta, cs[j].theta, top.matching.curves[run.curve]);
    // Orient so the superlevel side is on the left.
    const auto [left, right] = sep.probes(1e-6 * std::max(1.0, family.domain.bounding_box().diameter()));
    const SuperlevelRegion& region = family.levels[run.first_level].region;
    if (!region.contains(left) && region.contains(right)) {
      std::reverse(sep.curve.begin(), sep.curve.end());
      sep = Separator::along(family.domain, cs[j].theta, cs[i].theta, std::move(sep.curve));
    }
    separators.push_back(std::move(sep));
    jumps.push_back(weight);
  }
  return RegionTree::from_separators(family.domain, family.aniso, field.grid(), std::move(separators), jumps,
                                     threshold);
}

/// u_j: on every cell, the path sum of its region. Cells outside the domain
/// whose side pattern matches no region get 0.
inline SolutionField jump_part(const RegionTree& tree) {
  const std::vector<double> sums = tree.path_sums();
  return SolutionField::sample(tree.domain(), tree.aniso(), tree.grid(), [&](Point x) {
    const auto r = tree.find_region(x);
    return r ? sums[*r] : 0.0;
  });
}

/// u_c = u - u_j. Throws "decomposition incomplete" if u_c still jumps across
/// a separator by more than the tree's threshold.
inline SolutionField continuous_part(const SolutionField& field, const RegionTree& tree) {
  if (!(field.grid() == tree.grid())) throw validation_error("field and tree use different grids");
  const SolutionField uj = jump_part(tree);
  SolutionField uc = SolutionField::sample(field.domain(), field.aniso(), field.grid(), [](Point) { return 0.0; });
  auto& values = uc.mutable_values();
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = field.values()[k] - uj.values()[k];
  uc.refresh_tv();

  const std::vector<double> sums = tree.path_sums();
  auto residual_too_large = [&](Point left, Point right) {
    const double residual = (field.value_at(left) - sums[tree.region_of(left)]) -
                            (field.value_at(right) - sums[tree.region_of(right)]);
    return std::abs(residual) > tree.threshold();
  };
  if (field.family()) {
    const double offset = 1e-6 * std::max(1.0, field.domain().bounding_box().diameter());
    for (const Separator& sep : tree.separators()) {
      const auto [left, right] = sep.probes(offset);
      if (!field.domain().contains(left) || !field.domain().contains(right)) continue;
      if (residual_too_large(left, right)) throw invariant_error("decomposition incomplete");
    }
    return uc;
  }

  // Raster fields: probe a cell and a half off the separator at several
  // places, keeping only probes whose cell lies in the adjacent region.
  const double offset = 1.5 * std::max(field.cell_width(), field.cell_height());
  const BoundingBox& box = field.box();
  auto cell_of = [&](Point x) -> std::optional<std::size_t> {
    const double fi = std::floor((x.x - box.lo.x) / field.cell_width());
    const double fj = std::floor((x.y - box.lo.y) / field.cell_height());
    if (fi < 0.0 || fj < 0.0 || fi >= static_cast<double>(field.grid().width) ||
        fj >= static_cast<double>(field.grid().height))
      return std::nullopt;
    return field.index(static_cast<std::size_t>(fi), static_cast<std::size_t>(fj));
  };
  for (const RegionEdge& edge : tree.edges()) {
    const Separator& sep = tree.separators()[edge.separator];
    for (std::size_t k = 1; k < sep.curve.size(); ++k) {
      const Point a = sep.curve[k - 1], b = sep.curve[k];
      const Point d = b - a;
      const double len = euclidean_norm(d);
      if (len == 0.0) continue;
      const Point n{-d.y / len, d.x / len};
      for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const Point on = a + s * d;
        const Point left = on + offset * n, right = on - offset * n;
        const auto cl = cell_of(left), cr = cell_of(right);
        if (!cl || !cr || !field.mask()[*cl] || !field.mask()[*cr]) continue;
        if (tree.cell_region(*cl) != edge.high || tree.cell_region(*cr) != edge.low) continue;
        if (tree.find_region(left) != edge.high || tree.find_region(right) != edge.low) continue;
        if (residual_too_large(left, right)) throw invariant_error("decomposition incomplete");
      }
    }
  }
  return uc;
}

}  // namespace lgp

#endif  // LGP_DECOMPOSE_HPP
