#ifndef LGP_SOLVER_HPP
#define LGP_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lgp/boundary.hpp"
#include "lgp/error.hpp"
#include "lgp/geometry.hpp"
#include "lgp/matching.hpp"
#include "lgp/parallel.hpp"
#include "lgp/region.hpp"

namespace lgp {

inline constexpr std::size_t kDefaultLevels = 200;

struct GridSpec {
  std::size_t width = 512;
  std::size_t height = 512;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

  void validate() const {
    if (width < 32 || height < 32) throw validation_error("grid resolution must be at least 32x32");
  }
};

/// One kept level of the sweep.
struct LevelSet {
  LevelMatching matching;
  SuperlevelRegion region;

  double level() const noexcept { return matching.level; }
  double perimeter() const noexcept { return matching.cost; }
};

struct SuperlevelFamily {
  ConvexDomain domain = ConvexDomain::unit_disk();
  Anisotropy aniso = Anisotropy::euclidean();
  double value_min = 0.0;
  double value_max = 0.0;
  double level_step = 0.0;
  std::vector<LevelSet> levels;           // increasing in level
  std::vector<double> skipped;            // non-regular levels
  std::vector<double> nesting_violations; // lower level of each unrepaired pair
  std::vector<double> repaired;           // levels whose matching was replaced

  /// Sum of per-level perimeters times the level spacing.
  double coarea_tv() const {
    double total = 0.0;
    for (const LevelSet& s : levels) total += s.perimeter() * level_step;
    return total;
  }

  std::size_t chord_count() const {
    std::size_t n = 0;
    for (const LevelSet& s : levels) n += s.matching.curves.size();
    return n;
  }
};

namespace detail {

using CrossingKey = std::vector<std::pair<double, int>>;

inline CrossingKey crossing_key(const CrossingSet& cs) {
  CrossingKey key;
  key.reserve(cs.size());
  for (const Crossing& c : cs.crossings) key.emplace_back(c.theta, c.direction == Direction::up ? 1 : 0);
  return key;
}

inline LevelSet make_level(LevelMatching m, const ConvexDomain& domain) {
  LevelSet s;
  s.region = SuperlevelRegion(m, domain);
  s.matching = std::move(m);
  return s;
}

/// Top-down pass: each level must contain the (already settled) level above
/// it. An offending level is replaced by the cheapest tied optimum that does.
inline void repair_nesting(SuperlevelFamily& family) {
  auto& levels = family.levels;
  for (std::size_t i = levels.size(); i-- > 1;) {
    const LevelSet& upper = levels[i];
    LevelSet& lower = levels[i - 1];
    if (upper.region.nested_within(lower.region, family.domain)) continue;
    const auto optima = enumerate_optimal(lower.matching.crossings, family.domain, family.aniso, kTieTolerance);
    std::optional<LevelSet> best;
    for (const LevelMatching& candidate : optima.matchings) {
      if (best && candidate.cost >= best->matching.cost) continue;
      LevelSet trial = make_level(candidate, family.domain);
      trial.matching.level = lower.level();
      if (upper.region.nested_within(trial.region, family.domain)) best = std::move(trial);
    }
    if (best) {
      lower = *std::move(best);
      family.repaired.push_back(lower.level());
    } else {
      family.nesting_violations.push_back(lower.level());
    }
  }
  std::sort(family.repaired.begin(), family.repaired.end());
  std::sort(family.nesting_violations.begin(), family.nesting_violations.end());
}

}  // namespace detail

/// Solves the per-level matching problem at K levels spaced uniformly in
/// value, then enforces nesting of the superlevel regions.
inline SuperlevelFamily sweep(const BoundaryDatum& f, const ConvexDomain& domain, const Anisotropy& aniso,
                              std::size_t K = kDefaultLevels) {
  if (K < 2) throw validation_error("level count must be at least 2");
  if (f.is_constant()) throw validation_error("boundary datum is constant (f non-constant required)");

  SuperlevelFamily family;
  family.domain = domain;
  family.aniso = aniso;
  family.value_min = f.min();
  family.value_max = f.max();
  family.level_step = (f.max() - f.min()) / static_cast<double>(K);

  std::vector<std::optional<CrossingSet>> crossings(K);
  parallel_for(K, [&](std::size_t k) {
    const double t = f.min() + (static_cast<double>(k) + 0.5) * family.level_step;
    try {
      CrossingSet cs = level_crossings(f, t);
      if (!cs.empty() && cs.well_formed()) crossings[k] = std::move(cs);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::validation) throw;
    }
  });

  // Levels with identical crossings share one matching computation.
  std::map<detail::CrossingKey, std::size_t> distinct_index;
  std::vector<std::size_t> representative;
  std::vector<std::size_t> group_of(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    if (!crossings[k]) continue;
    auto [it, inserted] = distinct_index.emplace(detail::crossing_key(*crossings[k]), representative.size());
    if (inserted) representative.push_back(k);
    group_of[k] = it->second;
  }
  std::vector<LevelMatching> solved(representative.size());
  parallel_for(representative.size(), [&](std::size_t g) {
    solved[g] = min_matching(*crossings[representative[g]], domain, aniso);
  });

  for (std::size_t k = 0; k < K; ++k) {
    const double t = f.min() + (static_cast<double>(k) + 0.5) * family.level_step;
    if (!crossings[k]) {
      family.skipped.push_back(t);
      continue;
    }
    LevelMatching m = solved[group_of[k]];
    m.level = t;
    m.crossings.level = t;
    family.levels.push_back(detail::make_level(std::move(m), domain));
  }
  if (family.levels.empty()) throw validation_error("no regular levels");
  detail::repair_nesting(family);
  return family;
}

/// Replaces level matchings by a different tied optimum wherever one exists
/// that keeps the family nested. Used to exhibit non-unique solutions.
inline SuperlevelFamily alternative_family(const SuperlevelFamily& base, std::size_t* changed = nullptr) {
  SuperlevelFamily alt = base;
  alt.repaired.clear();
  std::size_t count = 0;
  for (std::size_t i = alt.levels.size(); i-- > 0;) {
    LevelSet& current = alt.levels[i];
    // Non-segment realizations must also stay clear of the neighboring levels.
    std::vector<Polyline> neighbors;
    if (i + 1 < alt.levels.size())
      neighbors.insert(neighbors.end(), alt.levels[i + 1].matching.curves.begin(), alt.levels[i + 1].matching.curves.end());
    if (i > 0)
      neighbors.insert(neighbors.end(), base.levels[i - 1].matching.curves.begin(), base.levels[i - 1].matching.curves.end());
    const auto optima = enumerate_optimal(current.matching.crossings, alt.domain, alt.aniso, kTieTolerance);
    std::vector<LevelMatching> candidates;
    for (const LevelMatching& m : optima.matchings) {
      if (!m.straight()) continue;
      candidates.push_back(m);
      if (auto curved = non_segment_realization(m, alt.domain, alt.aniso, neighbors)) candidates.push_back(*std::move(curved));
    }
    for (const LevelMatching& candidate : candidates) {
      if (candidate.pairs == current.matching.pairs && candidate.curves == current.matching.curves) continue;
      LevelSet trial = detail::make_level(candidate, alt.domain);
      trial.matching.level = current.level();
      if (i + 1 < alt.levels.size() && !alt.levels[i + 1].region.nested_within(trial.region, alt.domain)) continue;
      if (i > 0 && !trial.region.nested_within(base.levels[i - 1].region, alt.domain)) continue;
      current = std::move(trial);
      ++count;
      break;
    }
  }
  if (changed) *changed = count;
  return alt;
}

// ---------------------------------------------------------------------------
// Solution fields

/// A raster of u over the domain's bounding box. Fields produced by
/// reconstruct keep their level family and answer point queries exactly.
class SolutionField {
 public:
  SolutionField(ConvexDomain domain, Anisotropy aniso, GridSpec grid)
      : domain_(std::move(domain)), aniso_(aniso), grid_(grid), box_(domain_.bounding_box()),
        values_(grid.width * grid.height, 0.0), mask_(grid.width * grid.height, 0) {
    grid_.validate();
    hx_ = box_.width() / static_cast<double>(grid_.width);
    hy_ = box_.height() / static_cast<double>(grid_.height);
    for (std::size_t j = 0; j < grid_.height; ++j)
      for (std::size_t i = 0; i < grid_.width; ++i) mask_[index(i, j)] = domain_.contains(cell_center(i, j)) ? 1 : 0;
  }

  /// Rasterizes a closed-form field.
  static SolutionField sample(const ConvexDomain& domain, const Anisotropy& aniso, GridSpec grid,
                              const std::function<double(Point)>& fn) {
    SolutionField field(domain, aniso, grid);
    parallel_for(grid.height, [&](std::size_t j) {
      for (std::size_t i = 0; i < grid.width; ++i) field.values_[field.index(i, j)] = fn(field.cell_center(i, j));
    });
    field.refresh_tv();
    return field;
  }

  const ConvexDomain& domain() const noexcept { return domain_; }
  const Anisotropy& aniso() const noexcept { return aniso_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const BoundingBox& box() const noexcept { return box_; }
  double cell_width() const noexcept { return hx_; }
  double cell_height() const noexcept { return hy_; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * grid_.width + i; }
  bool inside(std::size_t i, std::size_t j) const noexcept { return mask_[index(i, j)] != 0; }
  double value(std::size_t i, std::size_t j) const noexcept { return values_[index(i, j)]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& mutable_values() noexcept { return values_; }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  std::optional<double> coarea_tv() const noexcept { return coarea_tv_; }
  double grid_tv() const noexcept { return grid_tv_; }
  const std::shared_ptr<const SuperlevelFamily>& family() const noexcept { return family_; }

  Point cell_center(std::size_t i, std::size_t j) const {
    return {box_.lo.x + (static_cast<double>(i) + 0.5) * hx_, box_.lo.y + (static_cast<double>(j) + 0.5) * hy_};
  }

  /// u(x): exact level lookup when the family is known, nearest cell otherwise.
  double value_at(Point x) const {
    if (family_) return family_value(*family_, x);
    const auto clamp_index = [](double s, std::size_t n) {
      const double c = std::floor(s);
      if (c < 0.0) return std::size_t{0};
      return std::min(n - 1, static_cast<std::size_t>(c));
    };
    const std::size_t i = clamp_index((x.x - box_.lo.x) / hx_, grid_.width);
    const std::size_t j = clamp_index((x.y - box_.lo.y) / hy_, grid_.height);
    return values_[index(i, j)];
  }

  /// Recomputes the discrete total variation after values change.
  void refresh_tv() { grid_tv_ = compute_grid_tv(); }

  /// Largest kept level whose region contains x, or the datum minimum.
  static double family_value(const SuperlevelFamily& family, Point x) {
    const auto& levels = family.levels;
    std::size_t lo = 0, hi = levels.size();  // levels[0, lo) contain x, levels[hi, end) do not
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (levels[mid].region.contains(x)) lo = mid + 1;
      else hi = mid;
    }
    return lo == 0 ? family.value_min : levels[lo - 1].level();
  }

 private:
  friend SolutionField reconstruct(std::shared_ptr<const SuperlevelFamily> family, GridSpec grid);

  // Forward differences between cells that are both inside; the gradient
  // vector of each cell is charged phi(grad) times the cell area.
  double compute_grid_tv() const {
    double total = 0.0;
    for (std::size_t j = 0; j < grid_.height; ++j) {
      for (std::size_t i = 0; i < grid_.width; ++i) {
        if (!inside(i, j)) continue;
        const double u = value(i, j);
        const double dx = (i + 1 < grid_.width && inside(i + 1, j)) ? value(i + 1, j) - u : 0.0;
        const double dy = (j + 1 < grid_.height && inside(i, j + 1)) ? value(i, j + 1) - u : 0.0;
        if (dx != 0.0 || dy != 0.0) total += aniso_.norm({dx * hy_, dy * hx_});
      }
    }
    return total;
  }

  ConvexDomain domain_;
  Anisotropy aniso_;
  GridSpec grid_;
  BoundingBox box_;
  double hx_ = 0.0;
  double hy_ = 0.0;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
  std::optional<double> coarea_tv_;
  double grid_tv_ = 0.0;
  std::shared_ptr<const SuperlevelFamily> family_;
};

/// Throws unless every kept region contains the next one up.
inline void verify_nesting(const SuperlevelFamily& family) {
  for (std::size_t i = 1; i < family.levels.size(); ++i)
    if (!family.levels[i].region.nested_within(family.levels[i - 1].region, family.domain))
      throw invariant_error("nesting violated at level " + std::to_string(family.levels[i - 1].level()));
}

/// u(x) = max{t_k : x in region(t_k)}, floored at the datum minimum.
inline SolutionField reconstruct(std::shared_ptr<const SuperlevelFamily> family, GridSpec grid) {
  if (!family) throw validation_error("missing level family");
  verify_nesting(*family);
  SolutionField field(family->domain, family->aniso, grid);
  parallel_for(grid.height, [&](std::size_t j) {
    for (std::size_t i = 0; i < grid.width; ++i)
      field.values_[field.index(i, j)] = SolutionField::family_value(*family, field.cell_center(i, j));
  });
  field.coarea_tv_ = family->coarea_tv();
  field.family_ = std::move(family);
  field.refresh_tv();
  return field;
}

inline SolutionField reconstruct(const SuperlevelFamily& family, GridSpec grid) {
  return reconstruct(std::make_shared<const SuperlevelFamily>(family), grid);
}

/// Integral over theta of |u(offset(theta)) - f(theta)| along the inner
/// offset curve at distance `band` from the boundary.
inline double trace_check(const SolutionField& field, const BoundaryDatum& f, double band,
                          std::size_t samples = 1u << 16) {
  if (!(band > 0.0) || !(band < field.domain().inradius()))
    throw validation_error("trace band must lie in (0, inradius)");
  if (samples == 0) throw validation_error("trace check needs samples");
  const double dtheta = kTwoPi / static_cast<double>(samples);
  double total = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double theta = (static_cast<double>(i) + 0.5) * dtheta;
    const Point q = field.domain().point(theta) + band * field.domain().inward_normal(theta);
    total += std::abs(field.value_at(q) - f(theta));
  }
  return total * dtheta;
}

// ---------------------------------------------------------------------------
// L1 distances between fields

namespace detail {

/// x-coordinates where the horizontal line at height y may change u.
inline void add_breakpoints(const SolutionField& field, double y, double x0, double x1, std::vector<double>& out) {
  if (const auto& family = field.family()) {
    for (const LevelSet& s : family->levels) {
      for (const auto& [a, b] : s.region.segments()) {
        if ((a.y < y) == (b.y < y)) continue;
        const double x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (x > x0 && x < x1) out.push_back(x);
      }
    }
    return;
  }
  const double lo = field.box().lo.x, h = field.cell_width();
  for (std::size_t i = 1; i < field.grid().width; ++i) {
    const double x = lo + static_cast<double>(i) * h;
    if (x > x0 && x < x1) out.push_back(x);
  }
}

}  // namespace detail

/// L1 distance over the domain. Exact along each scanline (u is piecewise
/// constant between breakpoints), midpoint rule across `rows` scanlines.
inline double l1_distance(const SolutionField& a, const SolutionField& b, std::size_t rows = 2048) {
  const ConvexDomain& domain = a.domain();
  const BoundingBox box = domain.bounding_box();
  const double dy = box.height() / static_cast<double>(rows);
  std::vector<double> row_total(rows, 0.0);
  parallel_for(rows, [&](std::size_t r) {
    const double y = box.lo.y + (static_cast<double>(r) + 0.5) * dy;
    const auto extent = domain.horizontal_extent(y);
    if (!extent) return;
    const auto [x0, x1] = *extent;
    std::vector<double> xs{x0, x1};
    detail::add_breakpoints(a, y, x0, x1, xs);
    detail::add_breakpoints(b, y, x0, x1, xs);
    std::sort(xs.begin(), xs.end());
    double sum = 0.0;
    for (std::size_t k = 1; k < xs.size(); ++k) {
      const double len = xs[k] - xs[k - 1];
      if (len <= 0.0) continue;
      const Point mid{0.5 * (xs[k] + xs[k - 1]), y};
      sum += std::abs(a.value_at(mid) - b.value_at(mid)) * len;
    }
    row_total[r] = sum;
  });
  double total = 0.0;
  for (double v : row_total) total += v;
  return total * dy;
}

inline double l1_norm(const SolutionField& field, std::size_t rows = 2048) {
  const SolutionField zero = SolutionField::sample(field.domain(), field.aniso(), field.grid(), [](Point) { return 0.0; });
  return l1_distance(field, zero, rows);
}

// ---------------------------------------------------------------------------
// Competitor comparison

struct TvComparison {
  double solver_tv = 0.0;
  double competitor_tv = 0.0;
  std::string measure;  // "coarea" or "grid"
};

/// Largest mean trace gap, relative to the value range, for comparable fields.
inline constexpr double kTraceAgreement = 5e-2;

/// Compares phi-total variations of the solver's field and a competitor with
/// the same boundary behavior. Throws if the solver's field is worse.
inline TvComparison compare_competitor(const SolutionField& field, const SolutionField& competitor,
                                       double rel_tol = 1e-6) {
  if (!(field.grid() == competitor.grid()) || field.domain().kind() != competitor.domain().kind())
    throw validation_error("incomparable: fields live on different grids");
  const ConvexDomain& domain = field.domain();
  const double band = std::min(0.5 * domain.inradius(), 2.0 * std::max(field.cell_width(), field.cell_height()));
  constexpr std::size_t kSamples = 4096;
  double gap = 0.0;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const double theta = (static_cast<double>(i) + 0.5) * kTwoPi / kSamples;
    const Point q = domain.point(theta) + band * domain.inward_normal(theta);
    gap += std::abs(field.value_at(q) - competitor.value_at(q));
  }
  gap /= kSamples;
  const auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
  const double range = std::max(1e-12, *hi - *lo);
  if (gap > kTraceAgreement * range) throw validation_error("incomparable: boundary traces differ");

  TvComparison out;
  if (field.coarea_tv() && competitor.coarea_tv()) {
    out.measure = "coarea";
    out.solver_tv = *field.coarea_tv();
    out.competitor_tv = *competitor.coarea_tv();
  } else {
    out.measure = "grid";
    out.solver_tv = field.grid_tv();
    out.competitor_tv = competitor.grid_tv();
  }
  if (out.solver_tv > out.competitor_tv + rel_tol * (1.0 + out.competitor_tv))
    throw invariant_error("solver field has larger total variation than the competitor");
  return out;
}

}  // namespace lgp

#endif  // LGP_SOLVER_HPP
