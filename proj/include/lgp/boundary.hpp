#ifndef LGP_BOUNDARY_HPP
#define LGP_BOUNDARY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include "json.hpp"

#include "lgp/error.hpp"
#include "lgp/geometry.hpp"

namespace lgp {

using Rational = boost::multiprecision::cpp_rational;

/// Resolution used to scan analytic data for crossings, range and variation.
inline constexpr std::size_t kDefaultResolution = 4096;
/// Levels whose crossing slope is below this are treated as critical.
inline constexpr double kRegularSlope = 1e-6;
/// Bisection target for crossing parameters.
inline constexpr double kCrossingTolerance = 1e-12;

/// Value on the counterclockwise boundary arc [from, to), angles in radians.
struct ArcValue {
  double from = 0.0;
  double to = 0.0;
  double value = 0.0;
};

/// A BV function on the boundary parameter circle [0, 2*pi).
class BoundaryDatum {
 public:
  enum class Kind { analytic, piecewise_constant, sampled };

  /// One constant piece of a piecewise-constant datum, running from `start`
  /// to the start of the next piece (cyclically).
  struct Piece {
    double start = 0.0;
    double value = 0.0;
  };

  static BoundaryDatum analytic(std::function<double(double)> fn, std::optional<std::pair<double, double>> range = {},
                                std::size_t resolution = kDefaultResolution) {
    if (!fn) throw validation_error("analytic datum needs an evaluator");
    if (resolution < 8) throw validation_error("analytic resolution too small");
    BoundaryDatum d(Kind::analytic);
    d.fn_ = std::move(fn);
    d.resolution_ = resolution;
    if (range) {
      d.min_ = range->first;
      d.max_ = range->second;
    } else {
      const auto s = d.sample(resolution);
      const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
      d.min_ = *lo;
      d.max_ = *hi;
    }
    return d;
  }

  static BoundaryDatum piecewise_constant(const std::vector<ArcValue>& arcs, double background = 0.0) {
    struct Span {
      double from, length, value;
    };
    std::vector<Span> spans;
    for (const ArcValue& a : arcs) {
      const double length = a.to - a.from;
      if (!(length > 0.0) || length > kTwoPi || !std::isfinite(a.value))
        throw validation_error("piecewise-constant arc must satisfy from < to <= from + 2*pi");
      spans.push_back({normalize_angle(a.from), length, a.value});
    }
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.from < b.from; });
    for (std::size_t i = 0; i + 1 < spans.size(); ++i)
      if (spans[i].from + spans[i].length > spans[i + 1].from + 1e-15)
        throw validation_error("piecewise-constant arcs overlap");
    if (spans.size() > 1 && spans.back().from + spans.back().length > spans.front().from + kTwoPi + 1e-15)
      throw validation_error("piecewise-constant arcs overlap");

    // Breakpoints split the circle; each gap between breakpoints gets the
    // value of the arc covering it or the background.
    std::vector<double> cuts;
    for (const Span& s : spans) {
      cuts.push_back(s.from);
      cuts.push_back(normalize_angle(s.from + s.length));
    }
    if (cuts.empty()) cuts.push_back(0.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto covering = [&](double theta) {
      for (const Span& s : spans)
        if (ccw_span(s.from, theta) < s.length) return s.value;
      return background;
    };
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      const double next = i + 1 < cuts.size() ? cuts[i + 1] : cuts[0] + kTwoPi;
      const double value = covering(cuts[i] + 0.5 * (next - cuts[i]));
      if (!pieces.empty() && pieces.back().value == value) continue;
      pieces.push_back({cuts[i], value});
    }
    if (pieces.size() > 1 && pieces.back().value == pieces.front().value) pieces.pop_back();

    BoundaryDatum d(Kind::piecewise_constant);
    d.pieces_ = std::move(pieces);
    d.arcs_ = arcs;
    d.background_ = background;
    d.min_ = d.max_ = d.pieces_.front().value;
    for (const Piece& p : d.pieces_) {
      d.min_ = std::min(d.min_, p.value);
      d.max_ = std::max(d.max_, p.value);
    }
    return d;
  }

  /// Values at theta_i = 2*pi*i/N, linearly interpolated and periodic.
  static BoundaryDatum sampled(std::vector<double> values) {
    if (values.size() < 4) throw validation_error("sampled datum needs at least 4 samples");
    for (double v : values)
      if (!std::isfinite(v)) throw validation_error("sampled datum contains a non-finite value");
    BoundaryDatum d(Kind::sampled);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    d.min_ = *lo;
    d.max_ = *hi;
    d.samples_ = std::make_shared<const std::vector<double>>(std::move(values));
    return d;
  }

  static BoundaryDatum constant(double value) { return piecewise_constant({}, value); }

  Kind kind() const noexcept { return kind_; }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  bool is_constant() const noexcept { return !(max_ > min_); }

  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  const std::vector<ArcValue>& arcs() const noexcept { return arcs_; }
  double background() const noexcept { return background_; }
  const std::vector<double>& samples() const { return *samples_; }
  std::size_t resolution() const noexcept { return kind_ == Kind::sampled ? samples_->size() : resolution_; }

  double operator()(double theta) const {
    theta = normalize_angle(theta);
    switch (kind_) {
      case Kind::analytic:
        return fn_(theta);
      case Kind::piecewise_constant: {
        auto it = std::upper_bound(pieces_.begin(), pieces_.end(), theta,
                                   [](double t, const Piece& p) { return t < p.start; });
        return it == pieces_.begin() ? pieces_.back().value : std::prev(it)->value;
      }
      case Kind::sampled: {
        const auto& s = *samples_;
        const double pos = theta / kTwoPi * static_cast<double>(s.size());
        const std::size_t i = std::min(static_cast<std::size_t>(pos), s.size() - 1);
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * s[i] + w * s[(i + 1) % s.size()];
      }
    }
    return 0.0;
  }

  /// Uniform samples f(2*pi*i/n), i = 0..n-1.
  std::vector<double> sample(std::size_t n) const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (*this)(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    return out;
  }

  /// Integral of |f| over the parameter circle.
  double l1_norm(std::size_t n = 1u << 16) const {
    if (kind_ == Kind::piecewise_constant) {
      double total = 0.0;
      for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const double next = i + 1 < pieces_.size() ? pieces_[i + 1].start : pieces_[0].start + kTwoPi;
        total += std::abs(pieces_[i].value) * (next - pieces_[i].start);
      }
      return total;
    }
    double total = 0.0;
    for (double v : sample(n)) total += std::abs(v);
    return total * kTwoPi / static_cast<double>(n);
  }

 private:
  explicit BoundaryDatum(Kind kind) : kind_(kind) {}

  Kind kind_;
  double min_ = 0.0;
  double max_ = 0.0;
  std::function<double(double)> fn_;
  std::size_t resolution_ = kDefaultResolution;
  std::vector<Piece> pieces_;
  std::vector<ArcValue> arcs_;
  double background_ = 0.0;
  std::shared_ptr<const std::vector<double>> samples_;
};

/// Integral of |f - g| over the parameter circle, by uniform sampling.
inline double l1_distance(const BoundaryDatum& f, const BoundaryDatum& g, std::size_t n = 1u << 16) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = kTwoPi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    total += std::abs(f(theta) - g(theta));
  }
  return total * kTwoPi / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Variation and level crossings

inline double bv_seminorm(const BoundaryDatum& f, std::size_t resolution = kDefaultResolution) {
  auto cyclic_variation = [](const std::vector<double>& v) {
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) total += std::abs(v[(i + 1) % v.size()] - v[i]);
    return total;
  };
  switch (f.kind()) {
    case BoundaryDatum::Kind::piecewise_constant: {
      std::vector<double> values;
      for (const auto& p : f.pieces()) values.push_back(p.value);
      return values.size() < 2 ? 0.0 : cyclic_variation(values);
    }
    case BoundaryDatum::Kind::sampled:
      return cyclic_variation(f.samples());
    case BoundaryDatum::Kind::analytic:
      return cyclic_variation(f.sample(resolution));
  }
  return 0.0;
}

enum class Direction { up, down };

struct Crossing {
  double theta = 0.0;
  Direction direction = Direction::up;

  friend bool operator==(const Crossing&, const Crossing&) = default;
};

/// Points where the datum crosses `level`, sorted counterclockwise.
struct CrossingSet {
  double level = 0.0;
  std::vector<Crossing> crossings;

  std::size_t size() const noexcept { return crossings.size(); }
  bool empty() const noexcept { return crossings.empty(); }

  /// Even count with alternating directions in cyclic order.
  bool well_formed() const {
    if (crossings.size() % 2 != 0) return false;
    for (std::size_t i = 0; i < crossings.size(); ++i)
      if (crossings[i].direction == crossings[(i + 1) % crossings.size()].direction) return false;
    return true;
  }

  bool same_points(const CrossingSet& other) const { return crossings == other.crossings; }
};

inline CrossingSet level_crossings(const BoundaryDatum& f, double t) {
  CrossingSet out{t, {}};
  if (!(t > f.min() && t < f.max())) return out;

  if (f.kind() == BoundaryDatum::Kind::piecewise_constant) {
    const auto& pieces = f.pieces();
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    for (const auto& p : pieces)
      if (std::abs(p.value - t) <= tol) throw validation_error("non-regular level");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const double left = pieces[(i + pieces.size() - 1) % pieces.size()].value;
      const double right = pieces[i].value;
      if ((left < t && t < right) || (right < t && t < left))
        out.crossings.push_back({pieces[i].start, right > t ? Direction::up : Direction::down});
    }
    return out;
  }

  const std::size_t n = f.resolution();
  const std::vector<double> values = f.kind() == BoundaryDatum::Kind::sampled ? f.samples() : f.sample(n);
  const double step = kTwoPi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g0 = values[i] - t;
    const double g1 = values[(i + 1) % n] - t;
    const bool above0 = g0 > 0.0, above1 = g1 > 0.0;
    if (above0 == above1) continue;
    if (std::abs(g1 - g0) / step < kRegularSlope) throw validation_error("non-regular level");
    double lo = step * static_cast<double>(i);
    double hi = lo + step;
    while (hi - lo > kCrossingTolerance) {
      const double mid = 0.5 * (lo + hi);
      if (((f(mid) - t) > 0.0) == above0)
        lo = mid;
      else
        hi = mid;
    }
    out.crossings.push_back({normalize_angle(0.5 * (lo + hi)), above1 ? Direction::up : Direction::down});
  }
  std::sort(out.crossings.begin(), out.crossings.end(),
            [](const Crossing& a, const Crossing& b) { return a.theta < b.theta; });
  return out;
}

// ---------------------------------------------------------------------------
// Built-in data

/// theta -> cos(2*theta - phase) on the boundary parameter.
inline BoundaryDatum brothers_datum(double phase) {
  return BoundaryDatum::analytic([phase](double theta) { return std::cos(2.0 * theta - phase); }, std::pair{-1.0, 1.0});
}

/// Characteristic function of the single arc [from, to].
inline BoundaryDatum arc_datum(double from, double to, double value = 1.0) {
  return BoundaryDatum::piecewise_constant({{from, to, value}}, 0.0);
}

enum class CantorVariant { thin, fat };

/// Fat-variant removal at stage n is rho * 2^{-2n}.
inline constexpr double kDefaultFatRho = 1.0 / 65536.0;
inline constexpr int kMaxCantorStage = 20;

inline Rational pow2(int k) {
  Rational r(1);
  for (int i = 0; i < std::abs(k); ++i) r *= 2;
  return k >= 0 ? r : Rational(1) / r;
}

/// Closed form (2^n + 1) / 2^{2n+1} for the thin-variant interval length.
inline Rational cantor_interval_length(int n) {
  if (n < 0) throw validation_error("Cantor stage must be nonnegative");
  return (pow2(n) + 1) / pow2(2 * n + 1);
}

/// Length removed from the middle of every interval at stage n >= 1.
inline Rational cantor_removal(int n, CantorVariant variant, double rho = kDefaultFatRho) {
  return variant == CantorVariant::thin ? pow2(-2 * n) : Rational(rho) * pow2(-2 * n);
}

/// Interval length at stage n by the halving recurrence, exactly.
inline Rational cantor_length_recurrence(int n, CantorVariant variant = CantorVariant::thin, double rho = kDefaultFatRho) {
  if (n < 0) throw validation_error("Cantor stage must be nonnegative");
  Rational a(1);
  for (int k = 1; k <= n; ++k) a = (a - cantor_removal(k, variant, rho)) / 2;
  return a;
}

/// Stage-n intervals inside [0, 1], exact.
inline std::vector<std::pair<Rational, Rational>> cantor_intervals(int n, CantorVariant variant = CantorVariant::thin,
                                                                  double rho = kDefaultFatRho) {
  if (n < 0 || n > kMaxCantorStage) throw validation_error("Cantor stage must lie in [0, 20]");
  std::vector<std::pair<Rational, Rational>> intervals{{Rational(0), Rational(1)}};
  for (int k = 1; k <= n; ++k) {
    const Rational len = cantor_length_recurrence(k, variant, rho);
    std::vector<std::pair<Rational, Rational>> next;
    next.reserve(intervals.size() * 2);
    for (const auto& [lo, hi] : intervals) {
      next.emplace_back(lo, lo + len);
      next.emplace_back(hi - len, hi);
    }
    intervals = std::move(next);
  }
  return intervals;
}

/// sqrt(1 - cos x) evaluated as sqrt(2)|sin(x/2)| to avoid cancellation.
inline double half_chord(double x) { return std::numbers::sqrt2 * std::abs(std::sin(0.5 * x)); }

struct CantorInequality {
  int stage = 0;
  double lhs = 0.0;  // half_chord(a_n) + half_chord(removal at stage n)
  double rhs = 0.0;  // 2 * half_chord(a_{n+1})
  bool holds = false;  // lhs > rhs for thin, lhs < rhs for fat
};

inline CantorInequality cantor_inequality_check(int n, CantorVariant variant = CantorVariant::thin,
                                                double rho = kDefaultFatRho) {
  if (n < 1) throw validation_error("Cantor inequality needs stage n >= 1");
  CantorInequality out;
  out.stage = n;
  const double a_n = cantor_length_recurrence(n, variant, rho).convert_to<double>();
  const double a_next = cantor_length_recurrence(n + 1, variant, rho).convert_to<double>();
  const double gap = variant == CantorVariant::thin ? std::ldexp(1.0, -2 * n) : rho * std::ldexp(1.0, -2 * n);
  out.lhs = half_chord(a_n) + half_chord(gap);
  out.rhs = 2.0 * half_chord(a_next);
  out.holds = variant == CantorVariant::thin ? out.lhs > out.rhs : out.lhs < out.rhs;
  return out;
}

/// Auxiliary g(x) with x = 2^{-n}; positive on (0, 1), zero at 0.
inline double cantor_g(double x) {
  return half_chord(0.5 * x * (x + 1.0)) + half_chord(x * x) - 2.0 * half_chord(x * (x + 2.0) / 8.0);
}

/// Characteristic function of the stage-n Cantor intervals, [0, 1] read as radians.
inline BoundaryDatum cantor_stage_datum(int n, CantorVariant variant = CantorVariant::thin, double rho = kDefaultFatRho) {
  if (n < 0 || n > kMaxCantorStage) throw validation_error("Cantor stage must lie in [0, 20]");
  if (variant == CantorVariant::fat) {
    if (!(rho > 0.0 && rho < 1.0)) throw validation_error("fat Cantor fraction must lie in (0, 1)");
    for (int k = 1; k <= n; ++k)
      if (!cantor_inequality_check(k, variant, rho).holds)
        throw invariant_error("fat Cantor removal too large: reversed inequality fails at stage " + std::to_string(k));
  }
  std::vector<ArcValue> arcs;
  for (const auto& [lo, hi] : cantor_intervals(n, variant, rho))
    arcs.push_back({lo.convert_to<double>(), hi.convert_to<double>(), 1.0});
  return BoundaryDatum::piecewise_constant(arcs, 0.0);
}

// ---------------------------------------------------------------------------
// Mollification

namespace detail {

/// Standard bump exp(-1/(1-s^2)) on (-1, 1) and its normalized CDF.
class BumpKernel {
 public:
  static const BumpKernel& instance() {
    static const BumpKernel k;
    return k;
  }

  static double density(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

  /// Mass of the normalized bump on (-1, s].
  double cdf(double s) const {
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double pos = (s + 1.0) / 2.0 * static_cast<double>(kTable);
    const std::size_t i = std::min(static_cast<std::size_t>(pos), kTable - 1);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * table_[i] + w * table_[i + 1];
  }

 private:
  static constexpr std::size_t kTable = 1u << 14;

  BumpKernel() : table_(kTable + 1, 0.0) {
    // Composite Simpson on each table cell.
    const double h = 2.0 / static_cast<double>(kTable);
    for (std::size_t i = 0; i < kTable; ++i) {
      const double a = -1.0 + h * static_cast<double>(i);
      table_[i + 1] = table_[i] + h / 6.0 * (density(a) + 4.0 * density(a + 0.5 * h) + density(a + h));
    }
    const double total = table_.back();
    for (double& v : table_) v /= total;
  }

  std::vector<double> table_;
};

}  // namespace detail

/// Circular convolution with a smooth bump supported on [-eps, eps],
/// returned in sampled form.
inline BoundaryDatum mollify(const BoundaryDatum& f, double eps, std::size_t resolution = 0) {
  if (!(eps > 0.0)) throw validation_error("mollifier width must be positive");
  if (!(eps < std::numbers::pi)) throw validation_error("mollifier width must be below pi");
  if (resolution == 0)
    resolution = std::max<std::size_t>(kDefaultResolution, static_cast<std::size_t>(std::ceil(8.0 * kTwoPi / eps)));
  const double step = kTwoPi / static_cast<double>(resolution);
  std::vector<double> out(resolution);

  if (f.kind() == BoundaryDatum::Kind::piecewise_constant) {
    const auto& pieces = f.pieces();
    const auto& kernel = detail::BumpKernel::instance();
    for (std::size_t i = 0; i < resolution; ++i) {
      const double theta = step * static_cast<double>(i);
      double v = f(theta - eps);
      if (pieces.size() > 1) {
        for (std::size_t j = 0; j < pieces.size(); ++j) {
          double offset = normalize_angle(pieces[j].start - theta + eps) - eps;  // in [-eps, 2*pi - eps)
          if (offset <= -eps || offset >= eps) continue;
          const double jump = pieces[j].value - pieces[(j + pieces.size() - 1) % pieces.size()].value;
          v += jump * (1.0 - kernel.cdf(offset / eps));
        }
      }
      out[i] = v;
    }
    return BoundaryDatum::sampled(std::move(out));
  }

  const std::vector<double> base = f.sample(resolution);
  const auto half = static_cast<std::ptrdiff_t>(std::floor(eps / step));
  std::vector<double> weights;
  for (std::ptrdiff_t k = -half; k <= half; ++k)
    weights.push_back(detail::BumpKernel::density(static_cast<double>(k) * step / eps));
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return BoundaryDatum::sampled(base);
  for (double& w : weights) w /= total;
  const auto n = static_cast<std::ptrdiff_t>(resolution);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k) v += weights[static_cast<std::size_t>(k + half)] * base[static_cast<std::size_t>(((i + k) % n + n) % n)];
    out[static_cast<std::size_t>(i)] = v;
  }
  return BoundaryDatum::sampled(std::move(out));
}

// ---------------------------------------------------------------------------
// Import

/// Reads "theta,value" CSV rows on a uniform grid starting at theta = 0.
inline BoundaryDatum read_sampled_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw validation_error("empty CSV datum");
  line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }), line.end());
  if (line != "theta,value") throw validation_error("CSV datum header must be \"theta,value\"");
  std::vector<double> thetas, values;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    double theta = 0.0, value = 0.0;
    char comma = 0;
    if (!(row >> theta >> comma >> value) || comma != ',') throw validation_error("malformed CSV row: " + line);
    thetas.push_back(theta);
    values.push_back(value);
  }
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < thetas.size(); ++i)
    if (std::abs(thetas[i] - kTwoPi * static_cast<double>(i) / n) > 1e-6)
      throw validation_error("CSV datum must be sampled uniformly on [0, 2*pi) starting at 0");
  return BoundaryDatum::sampled(std::move(values));
}

/// Reads [{"from":..,"to":..,"value":..}, ...]; uncovered arcs take `background`.
inline BoundaryDatum piecewise_from_json(const nlohmann::json& j, double background = 0.0) {
  if (!j.is_array()) throw validation_error("piecewise-constant datum must be a JSON array");
  std::vector<ArcValue> arcs;
  for (const auto& item : j) {
    if (!item.contains("from") || !item.contains("to") || !item.contains("value"))
      throw validation_error("piecewise-constant arc needs from, to and value");
    arcs.push_back({item.at("from").get<double>(), item.at("to").get<double>(), item.at("value").get<double>()});
  }
  return BoundaryDatum::piecewise_constant(arcs, background);
}

}  // namespace lgp

#endif  // LGP_BOUNDARY_HPP
