#ifndef LGP_TESTS_SUPPORT_HPP
#define LGP_TESTS_SUPPORT_HPP

// Generators and independent checks shared by the unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "lgp/boundary.hpp"
#include "lgp/decompose.hpp"
#include "lgp/geometry.hpp"
#include "lgp/io.hpp"
#include "lgp/solver.hpp"

namespace lgp::test {

using Rng = std::mt19937_64;

/// f(theta) = sum_{k=1..3} a_k cos(k theta) + b_k sin(k theta).
inline BoundaryDatum random_trig_datum(Rng& rng) {
  std::normal_distribution<double> coef(0.0, 1.0);
  std::array<double, 3> a{}, b{};
  for (std::size_t k = 0; k < 3; ++k) {
    a[k] = coef(rng) / static_cast<double>(k + 1);
    b[k] = coef(rng) / static_cast<double>(k + 1);
  }
  return BoundaryDatum::analytic([a, b](double t) {
    double v = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double kk = static_cast<double>(k + 1);
      v += a[k] * std::cos(kk * t) + b[k] * std::sin(kk * t);
    }
    return v;
  });
}

/// Number of pairs of distinct level curves from one family that touch
/// (with the given slack) anywhere in the closed domain.
inline std::size_t touching_curve_pairs(const SuperlevelFamily& family, double slack = 1e-12) {
  const std::vector<Polyline> curves = distinct_curves(family);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      bool touch = false;
      for (std::size_t a = 1; !touch && a < curves[i].size(); ++a)
        for (std::size_t b = 1; !touch && b < curves[j].size(); ++b)
          touch = segments_touch(curves[i][a - 1], curves[i][a], curves[j][b - 1], curves[j][b], slack);
      bad += touch ? 1 : 0;
    }
  }
  return bad;
}

/// Random pairing of 2m cyclically ordered indices with nested-or-disjoint
/// index intervals.
inline std::vector<std::pair<std::size_t, std::size_t>> random_noncrossing_pairs(Rng& rng, std::size_t m) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::function<void(std::size_t, std::size_t)> fill = [&](std::size_t lo, std::size_t hi) {
    if (lo >= hi) return;
    const std::size_t choices = (hi - lo) / 2;
    const std::size_t k = lo + 1 + 2 * std::uniform_int_distribution<std::size_t>(0, choices - 1)(rng);
    out.emplace_back(lo, k);
    fill(lo + 1, k);
    fill(k + 1, hi);
  };
  fill(0, 2 * m);
  return out;
}

struct SyntheticInstance {
  std::vector<Separator> separators;
  std::vector<double> jumps;
  Point bump_center;
  double bump_radius = 0.0;
  double bump_height = 0.0;
};

/// Disjoint random chords of the domain with random signed jumps, plus a
/// smooth bump kept at least `clearance` away from every chord.
inline SyntheticInstance random_synthetic(Rng& rng, const ConvexDomain& domain, std::size_t chords, double clearance) {
  SyntheticInstance inst;
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::vector<double> thetas(2 * chords);
  for (double& t : thetas) t = angle(rng);
  std::sort(thetas.begin(), thetas.end());
  std::uniform_real_distribution<double> magnitude(0.1, 2.0);
  std::bernoulli_distribution sign(0.5);
  for (const auto& [i, j] : random_noncrossing_pairs(rng, chords)) {
    inst.separators.push_back(Separator::chord(domain, thetas[i], thetas[j]));
    inst.jumps.push_back(sign(rng) ? magnitude(rng) : -magnitude(rng));
  }
  const BoundingBox box = domain.bounding_box();
  std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y);
  for (int attempt = 0; attempt < 2000; ++attempt) {
    const Point c{ux(rng), uy(rng)};
    double room = domain.depth(c);
    for (const auto& s : inst.separators)
      room = std::min(room, point_segment_distance(c, s.curve.front(), s.curve.back()));
    if (room > clearance + 0.02) {
      inst.bump_center = c;
      inst.bump_radius = std::min(0.25, room - clearance);
      inst.bump_height = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      break;
    }
  }
  return inst;
}

inline double bump_value(const SyntheticInstance& inst, Point x) {
  if (inst.bump_radius <= 0.0) return 0.0;
  const double s = distance(x, inst.bump_center) / inst.bump_radius;
  if (s >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return inst.bump_height * q * q * q;
}

/// Jump-part oracle straight from the definition: the signed jumps of the
/// separators between x and a reference point.
inline double jump_oracle(const SyntheticInstance& inst, Point x, Point reference) {
  double total = 0.0;
  for (std::size_t s = 0; s < inst.separators.size(); ++s) {
    const int side_x = inst.separators[s].left_of(x) ? 1 : 0;
    const int side_r = inst.separators[s].left_of(reference) ? 1 : 0;
    total += inst.jumps[s] * static_cast<double>(side_x - side_r);
  }
  return total;
}

/// Largest |a - b - c| over cells inside the domain minus its smallest: the
/// spread of a - b around a constant.
inline double difference_spread(const SolutionField& a, const SolutionField& b) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    if (!a.mask()[k]) continue;
    const double d = a.values()[k] - b.values()[k];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi - lo;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& g, double a, double b, std::size_t n = 20000) {
  const double h = (b - a) / static_cast<double>(n);
  double s = g(a) + g(b);
  for (std::size_t i = 1; i < n; ++i) s += g(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace lgp::test

#endif  // LGP_TESTS_SUPPORT_HPP
