#ifndef LGP_IO_HPP
#define LGP_IO_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lgp/boundary.hpp"
#include "lgp/decompose.hpp"
#include "lgp/error.hpp"
#include "lgp/geometry.hpp"
#include "lgp/matching.hpp"
#include "lgp/solver.hpp"

namespace lgp {

using nlohmann::json;

inline constexpr int kSummarySchema = 1;

struct RunConfig {
  ConvexDomain domain = ConvexDomain::unit_disk();
  json datum = {{"builtin", "brothers"}, {"phase", 0.0}};
  Anisotropy aniso = Anisotropy::euclidean();
  std::size_t levels = kDefaultLevels;
  GridSpec grid;
  std::filesystem::path out = "lgp_out";
  std::filesystem::path base_dir = ".";  // relative datum files resolve against this
  double band = 0.005;
  double rel_tol = 0.0;
  std::vector<double> eps;  // mollifier widths for the approximation run
  std::uint64_t seed = 0;

  void validate() const {
    if (!(aniso.p() >= 1.0)) throw validation_error("p must be at least 1");
    if (levels < 2) throw validation_error("level count must be at least 2");
    grid.validate();
    for (double e : eps)
      if (!(e > 0.0)) throw validation_error("mollifier widths must be positive");
  }
};

namespace detail {

inline Point point_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw validation_error(std::string(what) + " must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace detail

inline Anisotropy parse_anisotropy(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return Anisotropy::infinity();
    try {
      return Anisotropy(std::stod(s));
    } catch (const std::logic_error&) {
      throw validation_error("p must be a number or \"inf\"");
    }
  }
  if (!j.is_number()) throw validation_error("p must be a number or \"inf\"");
  return Anisotropy(j.get<double>());
}

inline Anisotropy parse_anisotropy(const std::string& s) {
  if (s == "inf" || s == "infinity") return Anisotropy::infinity();
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(s, &used);
  } catch (const std::logic_error&) {
    throw validation_error("p must be a number or \"inf\"");
  }
  if (used != s.size()) throw validation_error("p must be a number or \"inf\"");
  return Anisotropy(p);
}

inline ConvexDomain parse_domain(const json& j) {
  const std::string kind = j.value("kind", "");
  if (kind == "circle")
    return ConvexDomain::circle(detail::point_from_json(j.value("center", json::array({0.0, 0.0})), "center"),
                                detail::number_or(j, "radius", 1.0));
  if (kind == "ellipse") {
    const json axes = j.value("semi_axes", json::array({1.0, 1.0}));
    const Point ab = detail::point_from_json(axes, "semi_axes");
    return ConvexDomain::ellipse(detail::point_from_json(j.value("center", json::array({0.0, 0.0})), "center"), ab.x,
                                 ab.y);
  }
  if (kind == "polygon") {
    if (!j.contains("vertices") || !j.at("vertices").is_array()) throw validation_error("polygon needs vertices");
    std::vector<Point> vertices;
    for (const auto& v : j.at("vertices")) vertices.push_back(detail::point_from_json(v, "vertex"));
    return ConvexDomain::polygon(std::move(vertices));
  }
  throw validation_error("domain kind must be circle, ellipse or polygon");
}

inline GridSpec parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw validation_error("grid must be WxH");
  try {
    std::size_t used_w = 0, used_h = 0;
    const std::string w = text.substr(0, x), h = text.substr(x + 1);
    const unsigned long width = std::stoul(w, &used_w), height = std::stoul(h, &used_h);
    if (used_w != w.size() || used_h != h.size()) throw validation_error("grid must be WxH");
    return {width, height};
  } catch (const std::logic_error&) {
    throw validation_error("grid must be WxH");
  }
}

inline RunConfig parse_config(const json& j, const std::filesystem::path& base_dir = ".") {
  if (!j.is_object()) throw validation_error("config must be a JSON object");
  RunConfig cfg;
  cfg.base_dir = base_dir;
  if (j.contains("domain")) cfg.domain = parse_domain(j.at("domain"));
  if (j.contains("datum")) cfg.datum = j.at("datum");
  if (j.contains("p")) cfg.aniso = parse_anisotropy(j.at("p"));
  if (j.contains("levels")) {
    const auto k = j.at("levels").get<long long>();
    if (k < 2) throw validation_error("level count must be at least 2");
    cfg.levels = static_cast<std::size_t>(k);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (g.is_string()) cfg.grid = parse_grid(g.get<std::string>());
    else if (g.is_array() && g.size() == 2) cfg.grid = {g[0].get<std::size_t>(), g[1].get<std::size_t>()};
    else throw validation_error("grid must be \"WxH\" or [W, H]");
  }
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  cfg.band = detail::number_or(j, "band", cfg.band);
  cfg.rel_tol = detail::number_or(j, "rel_tol", cfg.rel_tol);
  if (j.contains("eps")) cfg.eps = j.at("eps").get<std::vector<double>>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw validation_error(std::string("invalid config JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

inline CantorVariant parse_variant(const std::string& s) {
  if (s == "thin") return CantorVariant::thin;
  if (s == "fat") return CantorVariant::fat;
  throw validation_error("cantor variant must be thin or fat");
}

inline const char* variant_name(CantorVariant v) { return v == CantorVariant::thin ? "thin" : "fat"; }

/// Builds the boundary datum named by a datum spec.
inline BoundaryDatum make_datum(const json& spec, const std::filesystem::path& base_dir = ".") {
  auto resolve = [&](const std::string& file) {
    const std::filesystem::path p(file);
    return p.is_absolute() ? p : base_dir / p;
  };
  if (spec.contains("builtin")) {
    const std::string name = spec.at("builtin").get<std::string>();
    if (name == "brothers") return brothers_datum(detail::number_or(spec, "phase", 0.0));
    if (name == "arc")
      return arc_datum(detail::number_or(spec, "from", 0.0), detail::number_or(spec, "to", 1.0),
                       detail::number_or(spec, "value", 1.0));
    if (name == "cantor") {
      const int n = spec.value("n", 4);
      return cantor_stage_datum(n, parse_variant(spec.value("variant", "thin")),
                                detail::number_or(spec, "rho", kDefaultFatRho));
    }
    if (name == "constant") return BoundaryDatum::constant(detail::number_or(spec, "value", 0.0));
    throw validation_error("unknown builtin datum " + name);
  }
  if (spec.contains("arcs")) return piecewise_from_json(spec.at("arcs"), detail::number_or(spec, "background", 0.0));
  if (spec.contains("csv")) {
    std::ifstream in(resolve(spec.at("csv").get<std::string>()));
    if (!in) throw validation_error("cannot open datum CSV");
    return read_sampled_csv(in);
  }
  if (spec.contains("json")) {
    std::ifstream in(resolve(spec.at("json").get<std::string>()));
    if (!in) throw validation_error("cannot open datum JSON");
    try {
      return piecewise_from_json(json::parse(in), detail::number_or(spec, "background", 0.0));
    } catch (const json::exception& e) {
      throw validation_error(std::string("invalid datum JSON: ") + e.what());
    }
  }
  throw validation_error("datum needs builtin, arcs, csv or json");
}

// ---------------------------------------------------------------------------
// Serialization

inline json anisotropy_json(const Anisotropy& a) {
  if (a.is_infinity()) return "inf";
  return a.p();
}

inline json matching_json(const LevelMatching& m) {
  json pairs = json::array();
  for (const auto& [a, b] : m.pairs) pairs.push_back({a, b});
  return {{"t", m.level}, {"pairs", pairs}, {"cost", m.cost}, {"area", m.enclosed_area}};
}

inline json polyline_json(const Polyline& line) {
  json pts = json::array();
  for (const Point& p : line) pts.push_back({p.x, p.y});
  return pts;
}

inline json tree_json(const RegionTree& tree) {
  const std::vector<double> sums = tree.path_sums();
  json regions = json::array();
  for (std::size_t r = 0; r < tree.region_count(); ++r) {
    json region = {{"id", r}, {"value", sums[r]}};
    if (r < tree.cell_counts().size()) region["cells"] = tree.cell_counts()[r];
    regions.push_back(std::move(region));
  }
  json edges = json::array();
  for (const auto& e : tree.edges()) edges.push_back({{"a", e.low}, {"b", e.high}, {"weight", e.weight}});
  return {{"regions", regions}, {"edges", edges}, {"root", tree.root()}};
}

/// Summary shared by all commands; callers add command-specific keys.
inline json field_summary(const std::string& command, const SolutionField& field) {
  json s = {{"schema", kSummarySchema}, {"command", command}, {"grid_tv", field.grid_tv()},
            {"grid", {field.grid().width, field.grid().height}}, {"p", anisotropy_json(field.aniso())}};
  s["coarea_tv"] = field.coarea_tv() ? json(*field.coarea_tv()) : json(nullptr);
  if (const auto& family = field.family()) {
    s["levels_kept"] = family->levels.size();
    s["skipped_levels"] = family->skipped;
    s["nesting_violations"] = family->nesting_violations;
    s["repaired_levels"] = family->repaired;
  } else {
    s["levels_kept"] = 0;
    s["skipped_levels"] = json::array();
    s["nesting_violations"] = json::array();
    s["repaired_levels"] = json::array();
  }
  return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Grid CSV with one row per cell inside the domain.
inline std::string grid_csv(const SolutionField& field) {
  std::ostringstream out;
  out.precision(17);
  out << "x,y,u\n";
  for (std::size_t j = 0; j < field.grid().height; ++j) {
    for (std::size_t i = 0; i < field.grid().width; ++i) {
      if (!field.inside(i, j)) continue;
      const Point c = field.cell_center(i, j);
      out << c.x << ',' << c.y << ',' << field.value(i, j) << '\n';
    }
  }
  return out.str();
}

/// Distinct curves of a family; piecewise-constant data repeat the same chord
/// at many levels.
inline std::vector<Polyline> distinct_curves(const SuperlevelFamily& family) {
  std::set<std::vector<std::pair<double, double>>> seen;
  std::vector<Polyline> out;
  for (const LevelSet& s : family.levels) {
    for (const Polyline& c : s.matching.curves) {
      std::vector<std::pair<double, double>> key;
      for (const Point& p : c) key.emplace_back(p.x, p.y);
      if (seen.insert(std::move(key)).second) out.push_back(c);
    }
  }
  return out;
}

/// SVG with one path per distinct level curve and one for the boundary.
inline std::string family_svg(const SuperlevelFamily& family, std::size_t boundary_points = 720) {
  const BoundingBox box = family.domain.bounding_box();
  const double margin = 0.05 * box.diameter();
  const double scale = 1.0 / box.diameter();
  std::ostringstream out;
  out.precision(9);
  auto emit = [&](const Polyline& line, bool closed, const char* style) {
    out << "  <path d=\"";
    for (std::size_t k = 0; k < line.size(); ++k)
      out << (k == 0 ? "M" : " L") << line[k].x << ',' << -line[k].y;
    if (closed) out << " Z";
    out << "\" " << style << "/>\n";
  };
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << box.lo.x - margin << ' ' << -box.hi.y - margin
      << ' ' << box.width() + 2 * margin << ' ' << box.height() + 2 * margin << "\" width=\"800\" height=\""
      << static_cast<int>(800.0 * (box.height() + 2 * margin) / (box.width() + 2 * margin)) << "\">\n";
  Polyline outline;
  for (std::size_t k = 0; k < boundary_points; ++k)
    outline.push_back(family.domain.point(kTwoPi * static_cast<double>(k) / static_cast<double>(boundary_points)));
  std::ostringstream boundary_style;
  boundary_style << "fill=\"none\" stroke=\"black\" stroke-width=\"" << 4e-3 / scale << "\"";
  emit(outline, true, boundary_style.str().c_str());
  std::ostringstream chord_style;
  chord_style << "fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"" << 2e-3 / scale << "\"";
  for (const Polyline& c : distinct_curves(family)) emit(c, false, chord_style.str().c_str());
  out << "</svg>\n";
  return out.str();
}

}  // namespace lgp

#endif  // LGP_IO_HPP
