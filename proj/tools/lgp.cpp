// Command-line front end for the least gradient solver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lgp/boundary.hpp"
#include "lgp/decompose.hpp"
#include "lgp/error.hpp"
#include "lgp/io.hpp"
#include "lgp/matching.hpp"
#include "lgp/solver.hpp"
#include "lgp/testing/brute_force.hpp"

namespace fs = std::filesystem;
using namespace lgp;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string grid;
  std::string p;
  std::optional<long long> levels;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON run configuration");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--levels", levels, "number of sampled levels K");
    cmd->add_option("--grid", grid, "raster resolution WxH");
    cmd->add_option("--p", p, "anisotropy exponent (number or inf)");
    cmd->add_option("--seed", seed, "seed for randomized runs");
  }

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
    if (!out.empty()) cfg.out = out;
    if (!grid.empty()) cfg.grid = parse_grid(grid);
    if (!p.empty()) cfg.aniso = parse_anisotropy(p);
    if (levels) {
      if (*levels < 2) throw validation_error("level count must be at least 2");
      cfg.levels = static_cast<std::size_t>(*levels);
    }
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

struct Solved {
  std::shared_ptr<const SuperlevelFamily> family;
  SolutionField field;
};

Solved solve(const BoundaryDatum& f, const RunConfig& cfg) {
  auto family = std::make_shared<const SuperlevelFamily>(sweep(f, cfg.domain, cfg.aniso, cfg.levels));
  SolutionField field = reconstruct(family, cfg.grid);
  return {std::move(family), std::move(field)};
}

// Integral of |f - min f| over the boundary parameter.
double datum_spread(const BoundaryDatum& f) {
  constexpr std::size_t n = 1u << 16;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += f((static_cast<double>(i) + 0.5) * kTwoPi / n) - f.min();
  return total * kTwoPi / n;
}

void write_field_outputs(const fs::path& dir, const std::string& stem, const SolutionField& field) {
  write_text(dir / (stem + ".csv"), grid_csv(field));
  if (field.family()) write_text(dir / (stem + ".svg"), family_svg(*field.family()));
}

int cmd_solve(const RunConfig& cfg) {
  const BoundaryDatum f = make_datum(cfg.datum, cfg.base_dir);
  const Solved s = solve(f, cfg);
  const double trace = trace_check(s.field, f, cfg.band);
  const double spread = datum_spread(f);
  json summary = field_summary("solve", s.field);
  summary["trace_discrepancy"] = trace;
  summary["trace_relative"] = spread > 0.0 ? trace / spread : 0.0;
  summary["trace_lost"] = spread > 0.0 && trace > 0.25 * spread;
  summary["band"] = cfg.band;
  summary["chords"] = distinct_curves(*s.family).size();
  write_field_outputs(cfg.out, "solution", s.field);
  write_json(cfg.out / "summary.json", summary);
  std::cout << "levels kept " << s.family->levels.size() << ", skipped " << s.family->skipped.size() << "\n"
            << "coarea_tv " << *s.field.coarea_tv() << "  grid_tv " << s.field.grid_tv() << "\n"
            << "trace discrepancy " << trace << (summary["trace_lost"].get<bool>() ? " (trace lost)" : "") << "\n"
            << "wrote " << cfg.out.string() << "\n";
  return 0;
}

int cmd_nonuniqueness(const RunConfig& cfg) {
  if (!cfg.aniso.is_polyhedral())
    throw validation_error("uniqueness regime: for 1 < p < inf every minimizing level curve is a segment");
  const BoundaryDatum f = make_datum(cfg.datum, cfg.base_dir);
  const Solved s = solve(f, cfg);

  json per_level = json::array();
  json witnesses = json::array();
  std::size_t degenerate = 0;
  for (const LevelSet& level : s.family->levels) {
    const OptimalMatchings optima = enumerate_optimal(level.matching.crossings, cfg.domain, cfg.aniso, cfg.rel_tol);
    double lo = optima.matchings.front().cost, hi = lo;
    for (const auto& m : optima.matchings) {
      lo = std::min(lo, m.cost);
      hi = std::max(hi, m.cost);
    }
    const bool multiple = optima.matchings.size() >= 2;
    degenerate += multiple ? 1 : 0;
    per_level.push_back({{"t", level.level()}, {"optima", optima.matchings.size()}, {"cost_spread", hi - lo},
                         {"overflow", optima.overflow}});
    if (multiple && witnesses.size() < 8) {
      for (const Polyline& c : level.matching.curves) {
        if (!admits_non_segment_minimizer(c.front(), c.back(), cfg.aniso)) continue;
        const Polyline w = staircase_witness(c.front(), c.back(), cfg.aniso, 4);
        witnesses.push_back({{"t", level.level()}, {"chord_cost", chord_cost(c.front(), c.back(), cfg.aniso)},
                             {"witness_cost", polyline_cost(w, cfg.aniso)}, {"points", polyline_json(w)}});
        break;
      }
    }
  }

  std::size_t changed = 0;
  const SuperlevelFamily alt = alternative_family(*s.family, &changed);
  const SolutionField alt_field = reconstruct(alt, cfg.grid);
  // Both families use tied optima at every level, so their variations must agree.
  const double solution_tv = s.family->coarea_tv(), alternative_tv = alt.coarea_tv();
  if (std::abs(alternative_tv - solution_tv) > 1e-9 * (1.0 + solution_tv))
    throw invariant_error("alternative solution has a different total variation");

  const double fraction = static_cast<double>(degenerate) / static_cast<double>(s.family->levels.size());
  json summary = field_summary("nonuniqueness", s.field);
  summary["degenerate_levels"] = degenerate;
  summary["degenerate_fraction"] = fraction;
  summary["alternative_levels_changed"] = changed;
  summary["alternative_tv"] = alternative_tv;
  summary["solution_tv"] = solution_tv;
  summary["alternative_l1_distance"] = l1_distance(s.field, alt_field);
  write_field_outputs(cfg.out, "solution", s.field);
  write_field_outputs(cfg.out, "alternative", alt_field);
  write_json(cfg.out / "levels.json", per_level);
  write_json(cfg.out / "witnesses.json", witnesses);
  write_json(cfg.out / "summary.json", summary);
  if (degenerate == 0)
    std::cout << "note: every level has a unique optimum here; chords parallel to an axis (p = 1) or a diagonal "
                 "(p = inf) admit no other minimizer\n";
  std::cout << "levels with several optima: " << degenerate << " of " << s.family->levels.size() << "\n"
            << "alternative solution changes " << changed << " levels, tv " << alternative_tv << " vs "
            << solution_tv << "\n"
            << "wrote " << cfg.out.string() << "\n";
  return 0;
}

int cantor_stage_for(double eps) {
  return std::max(0, static_cast<int>(std::floor(std::log2(1.0 / eps) / 2.0)) - 1);
}

int cmd_approx(const RunConfig& cfg) {
  std::vector<double> schedule = cfg.eps;
  if (schedule.empty())
    for (int k = 4; k <= 10; ++k) schedule.push_back(std::ldexp(1.0, -k));
  std::sort(schedule.begin(), schedule.end(), std::greater<>());

  const bool cantor = cfg.datum.value("builtin", "") == "cantor";
  const BoundaryDatum base = make_datum(cfg.datum, cfg.base_dir);
  const CantorVariant variant = cantor ? parse_variant(cfg.datum.value("variant", "thin")) : CantorVariant::thin;
  const double rho = cfg.datum.value("rho", kDefaultFatRho);
  std::optional<Solved> reference;
  if (!cantor) reference = solve(base, cfg);

  std::ostringstream csv;
  csv.precision(12);
  csv << "eps,stage,bv_seminorm,data_l1,solution_l1_ref,solution_l1_prev,solution_l1_norm,coarea_tv,trace\n";
  json rows = json::array();
  std::optional<Solved> previous;
  for (double eps : schedule) {
    const int stage = cantor ? cantor_stage_for(eps) : -1;
    const BoundaryDatum target = cantor ? cantor_stage_datum(stage, variant, rho) : base;
    const BoundaryDatum smooth = mollify(target, eps);
    Solved s = solve(smooth, cfg);
    json row = {{"eps", eps},
                {"bv_seminorm", bv_seminorm(smooth)},
                {"data_l1", l1_distance(smooth, target)},
                {"solution_l1_norm", l1_norm(s.field)},
                {"coarea_tv", *s.field.coarea_tv()},
                {"trace", trace_check(s.field, target, cfg.band)}};
    row["stage"] = cantor ? json(stage) : json(nullptr);
    row["solution_l1_ref"] = reference ? json(l1_distance(s.field, reference->field)) : json(nullptr);
    row["solution_l1_prev"] = previous ? json(l1_distance(s.field, previous->field)) : json(nullptr);
    auto cell = [](const json& v) { return v.is_null() ? std::string() : v.dump(); };
    csv << eps << ',' << cell(row["stage"]) << ',' << row["bv_seminorm"].get<double>() << ','
        << row["data_l1"].get<double>() << ',' << cell(row["solution_l1_ref"]) << ','
        << cell(row["solution_l1_prev"]) << ',' << row["solution_l1_norm"].get<double>() << ','
        << row["coarea_tv"].get<double>() << ',' << row["trace"].get<double>() << '\n';
    std::cout << "eps " << eps << "  bv " << row["bv_seminorm"].get<double>() << "  data_l1 "
              << row["data_l1"].get<double>() << "  u_l1 " << row["solution_l1_norm"].get<double>() << "\n";
    rows.push_back(std::move(row));
    previous = std::move(s);
  }
  json summary = {{"schema", kSummarySchema}, {"command", "approx"}, {"p", anisotropy_json(cfg.aniso)},
                  {"reference_bv", bv_seminorm(base)}, {"rows", rows}};
  write_text(cfg.out / "approx.csv", csv.str());
  write_json(cfg.out / "summary.json", summary);
  std::cout << "wrote " << cfg.out.string() << "\n";
  return 0;
}

int cmd_cantor(const RunConfig& cfg, std::optional<int> n_max_opt, const std::string& variant_text,
               std::optional<double> rho_opt) {
  const CantorVariant variant = parse_variant(variant_text);
  const double rho = rho_opt.value_or(kDefaultFatRho);
  const int n_max = n_max_opt.value_or(variant == CantorVariant::thin ? kMaxCantorStage : 10);
  if (n_max < 0 || n_max > kMaxCantorStage) throw validation_error("n_max must lie in [0, 20]");
  if (variant == CantorVariant::fat && !(rho > 0.0 && rho < 1.0)) throw validation_error("rho must lie in (0, 1)");

  json rows = json::array();
  bool all_hold = true;
  std::cout << std::setw(3) << "n" << "  " << std::setw(24) << "a_n" << "  " << std::setw(14) << "a_n (float)"
            << "  " << std::setw(12) << "measure" << "  inequality\n";
  for (int n = 0; n <= n_max; ++n) {
    const Rational a = cantor_length_recurrence(n, variant, rho);
    const double measure = static_cast<double>(pow2(n) * a);
    json row = {{"n", n}, {"a_n", a.str()}, {"a_n_float", static_cast<double>(a)}, {"measure", measure}};
    if (variant == CantorVariant::thin) row["closed_form_matches"] = (a == cantor_interval_length(n));
    std::string verdict = "-";
    if (n >= 1) {
      const CantorInequality check = cantor_inequality_check(n, variant, rho);
      row["lhs"] = check.lhs;
      row["rhs"] = check.rhs;
      row["holds"] = check.holds;
      all_hold = all_hold && check.holds;
      verdict = check.holds ? (variant == CantorVariant::thin ? "holds" : "reversed") : "FAILS";
    }
    std::cout << std::setw(3) << n << "  " << std::setw(24) << a.str() << "  " << std::setw(14)
              << static_cast<double>(a) << "  " << std::setw(12) << measure << "  " << verdict << "\n";
    rows.push_back(std::move(row));
  }
  json summary = {{"schema", kSummarySchema}, {"command", "cantor"}, {"variant", variant_name(variant)},
                  {"n_max", n_max}, {"all_hold", all_hold}, {"rows", rows}};
  if (variant == CantorVariant::fat) summary["rho"] = rho;
  write_json(cfg.out / "cantor.json", summary);
  if (variant == CantorVariant::fat && !all_hold)
    throw invariant_error("reversed inequality fails for the configured rho");
  return 0;
}

int cmd_decompose(const RunConfig& cfg, std::optional<double> threshold) {
  const BoundaryDatum f = make_datum(cfg.datum, cfg.base_dir);
  const Solved s = solve(f, cfg);
  const RegionTree tree = build_region_tree(s.field, threshold);
  const SolutionField uj = jump_part(tree);
  const SolutionField uc = continuous_part(s.field, tree);
  json summary = field_summary("decompose", s.field);
  summary["regions"] = tree.region_count();
  summary["jump_curves"] = tree.edges().size();
  summary["jump_threshold"] = tree.threshold();
  summary["jump_grid_tv"] = uj.grid_tv();
  summary["continuous_grid_tv"] = uc.grid_tv();
  write_json(cfg.out / "tree.json", tree_json(tree));
  write_text(cfg.out / "jump.csv", grid_csv(uj));
  write_text(cfg.out / "continuous.csv", grid_csv(uc));
  write_json(cfg.out / "summary.json", summary);
  std::cout << "regions " << tree.region_count() << ", jump curves " << tree.edges().size() << "\n"
            << "grid_tv " << s.field.grid_tv() << " = jump " << uj.grid_tv() << " + continuous " << uc.grid_tv()
            << "\n"
            << "wrote " << cfg.out.string() << "\n";
  return 0;
}

int cmd_match_oracle(const RunConfig& cfg, int trials) {
  if (trials < 1) throw validation_error("trials must be positive");
  std::mt19937_64 rng(cfg.seed);
  const std::vector<Anisotropy> norms{Anisotropy(1.0), Anisotropy(1.5), Anisotropy(2.0), Anisotropy(3.0),
                                      Anisotropy::infinity()};
  const ConvexDomain disk = ConvexDomain::unit_disk();
  int mismatches = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = 2 * (1 + static_cast<std::size_t>(trial) % 5);
    const Anisotropy& aniso = norms[(static_cast<std::size_t>(trial) / 5) % norms.size()];
    const CrossingSet cs = testing::random_crossings(rng, n);
    const double dp = min_matching(cs, disk, aniso).cost;
    const double bf = testing::brute_force_minimum(cs, disk, aniso).min_cost;
    if (dp != bf) {
      ++mismatches;
      std::cout << "mismatch: n=" << n << " p=" << aniso.label() << " dp=" << dp << " brute=" << bf << "\n";
    }
  }
  std::cout << trials - mismatches << " of " << trials << " instances agree\n";
  if (mismatches > 0) throw invariant_error("matching disagrees with exhaustive search");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least gradient problem solver on convex planar domains"};
  app.require_subcommand(1);

  Overrides solve_opts, nonunique_opts, approx_opts, cantor_opts, decompose_opts, oracle_opts;
  auto* solve_cmd = app.add_subcommand("solve", "solve one boundary value problem");
  solve_opts.attach(solve_cmd);
  auto* nonunique_cmd = app.add_subcommand("nonuniqueness", "enumerate tied optimal level curves for p = 1 or inf");
  nonunique_opts.attach(nonunique_cmd);
  auto* approx_cmd = app.add_subcommand("approx", "mollified approximation sequence");
  approx_opts.attach(approx_cmd);
  auto* cantor_cmd = app.add_subcommand("cantor", "Cantor-set lengths and inequality checks");
  cantor_opts.attach(cantor_cmd);
  std::optional<int> n_max;
  std::string variant = "thin";
  std::optional<double> rho;
  cantor_cmd->add_option("--n-max", n_max, "largest stage");
  cantor_cmd->add_option("--variant", variant, "thin or fat")->check(CLI::IsMember({"thin", "fat"}));
  cantor_cmd->add_option("--rho", rho, "fat-variant removal fraction");
  auto* decompose_cmd = app.add_subcommand("decompose", "split the solution into continuous and jump parts");
  decompose_opts.attach(decompose_cmd);
  std::optional<double> threshold;
  decompose_cmd->add_option("--threshold", threshold, "minimum jump size");
  auto* oracle_cmd = app.add_subcommand("match-oracle", "compare the matching solver with exhaustive search");
  oracle_opts.attach(oracle_cmd);
  int trials = 500;
  oracle_cmd->add_option("--trials", trials, "number of random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_opts.resolve());
    if (*nonunique_cmd) return cmd_nonuniqueness(nonunique_opts.resolve());
    if (*approx_cmd) return cmd_approx(approx_opts.resolve());
    if (*cantor_cmd) return cmd_cantor(cantor_opts.resolve(), n_max, variant, rho);
    if (*decompose_cmd) return cmd_decompose(decompose_opts.resolve(), threshold);
    if (*oracle_cmd) return cmd_match_oracle(oracle_opts.resolve(), trials);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::validation ? 2 : 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
