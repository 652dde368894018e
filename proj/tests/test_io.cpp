#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "lgp/io.hpp"

using namespace lgp;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lgp_test_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Config, Defaults) {
  const RunConfig cfg = parse_config(json::object());
  EXPECT_EQ(cfg.domain.kind(), "circle");
  EXPECT_EQ(cfg.aniso.p(), 2.0);
  EXPECT_EQ(cfg.levels, 200u);
  EXPECT_EQ(cfg.grid, (GridSpec{512, 512}));
  EXPECT_EQ(cfg.datum.at("builtin"), "brothers");
}

TEST(Config, FullDocument) {
  const auto j = json::parse(R"({
    "domain": {"kind": "ellipse", "center": [0.5, 0], "semi_axes": [2, 1]},
    "datum": {"builtin": "cantor", "n": 3, "variant": "thin"},
    "p": "inf",
    "levels": 64,
    "grid": "128x96",
    "out": "runs/a",
    "band": 0.01,
    "eps": [0.25, 0.125],
    "seed": 42
  })");
  const RunConfig cfg = parse_config(j);
  EXPECT_EQ(cfg.domain.kind(), "ellipse");
  EXPECT_TRUE(cfg.aniso.is_infinity());
  EXPECT_EQ(cfg.levels, 64u);
  EXPECT_EQ(cfg.grid, (GridSpec{128, 96}));
  EXPECT_EQ(cfg.out, std::filesystem::path("runs/a"));
  EXPECT_EQ(cfg.band, 0.01);
  EXPECT_EQ(cfg.eps.size(), 2u);
  EXPECT_EQ(cfg.seed, 42u);
  const auto f = make_datum(cfg.datum);
  EXPECT_EQ(f.pieces().size(), 16u);
  EXPECT_EQ(parse_config(json::parse(R"({"grid": [64, 40]})")).grid, (GridSpec{64, 40}));
}

TEST(Config, ValidationErrors) {
  EXPECT_THROW(parse_config(json::parse(R"({"p": 0.5})")), Error);
  EXPECT_THROW(parse_config(json::parse(R"({"p": "two"})")), Error);
  EXPECT_THROW(parse_config(json::parse(R"({"levels": 1})")), Error);
  EXPECT_THROW(parse_config(json::parse(R"({"grid": "16x16"})")), Error);
  EXPECT_THROW(parse_config(json::parse(R"({"grid": "64by64"})")), Error);
  EXPECT_THROW(parse_config(json::parse(R"({"domain": {"kind": "square"}})")), Error);
  EXPECT_THROW(parse_config(json::parse(R"({"eps": [0.1, -0.1]})")), Error);
  EXPECT_THROW(parse_config(json::parse("[1, 2]")), Error);
  EXPECT_THROW(make_datum(json::parse(R"({"builtin": "spiral"})")), Error);
  EXPECT_THROW(make_datum(json::parse(R"({"nothing": 1})")), Error);
  EXPECT_THROW(parse_variant("medium"), Error);
}

TEST(Config, AnisotropyStrings) {
  EXPECT_TRUE(parse_anisotropy(std::string("inf")).is_infinity());
  EXPECT_EQ(parse_anisotropy(std::string("1.5")).p(), 1.5);
  EXPECT_THROW(parse_anisotropy(std::string("1.5x")), Error);
  EXPECT_EQ(anisotropy_json(Anisotropy::infinity()), "inf");
  EXPECT_EQ(anisotropy_json(Anisotropy(3.0)), 3.0);
  EXPECT_EQ(Anisotropy(1.5).label(), "1.5");
  EXPECT_EQ(Anisotropy::infinity().label(), "inf");
}

TEST(Config, LoadFromFileResolvesRelativeDatum) {
  const auto dir = scratch_dir("load");
  {
    std::ofstream csv(dir / "datum.csv");
    csv.precision(17);
    csv << "theta,value\n";
    for (int i = 0; i < 16; ++i) csv << kTwoPi * i / 16 << ',' << std::cos(kTwoPi * i / 16) << '\n';
  }
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"datum": {"csv": "datum.csv"}, "levels": 10, "grid": "32x32"})";
  }
  const RunConfig cfg = load_config(dir / "config.json");
  const auto f = make_datum(cfg.datum, cfg.base_dir);
  EXPECT_EQ(f.samples().size(), 16u);
  EXPECT_NEAR(f.max(), 1.0, 1e-15);
  {
    std::ofstream broken(dir / "broken.json");
    broken << "{ not json";
  }
  EXPECT_THROW(load_config(dir / "broken.json"), Error);
  EXPECT_THROW(load_config(dir / "missing.json"), Error);
  std::filesystem::remove_all(dir);
}

TEST(Output, MatchingAndTreeJsonShape) {
  const auto disk = ConvexDomain::unit_disk();
  const auto family = sweep(brothers_datum(0.0), disk, Anisotropy::euclidean(), 20);
  const json m = matching_json(family.levels.front().matching);
  EXPECT_TRUE(m.contains("t"));
  EXPECT_EQ(m.at("pairs").size(), 2u);
  EXPECT_EQ(m.at("pairs")[0].size(), 2u);
  EXPECT_GT(m.at("cost").get<double>(), 0.0);
  EXPECT_GT(m.at("area").get<double>(), 0.0);

  const auto tree = RegionTree::make(3, {{0, 1, 1.0, 0}, {1, 2, 2.0, 1}});
  const json t = tree_json(tree);
  EXPECT_EQ(t.at("regions").size(), 3u);
  EXPECT_EQ(t.at("regions")[2].at("value"), 3.0);
  EXPECT_EQ(t.at("edges").size(), 2u);
  EXPECT_EQ(t.at("edges")[1].at("weight"), 2.0);
  EXPECT_EQ(t.at("root"), 0);
}

TEST(Output, SummarySchema) {
  const auto disk = ConvexDomain::unit_disk();
  const auto u = reconstruct(sweep(brothers_datum(0.0), disk, Anisotropy::infinity(), 20), {48, 48});
  const json s = field_summary("solve", u);
  EXPECT_EQ(s.at("schema"), 1);
  EXPECT_EQ(s.at("command"), "solve");
  EXPECT_EQ(s.at("p"), "inf");
  EXPECT_EQ(s.at("levels_kept"), 20);
  EXPECT_TRUE(s.at("coarea_tv").is_number());
  EXPECT_TRUE(s.at("skipped_levels").is_array());
  const auto raster = SolutionField::sample(disk, Anisotropy::euclidean(), {32, 32}, [](Point) { return 1.0; });
  EXPECT_TRUE(field_summary("approx", raster).at("coarea_tv").is_null());
}

TEST(Output, SvgIsWellFormedWithOnePathPerCurve) {
  const auto disk = ConvexDomain::unit_disk();
  const auto family = sweep(arc_datum(0.5, 2.5), disk, Anisotropy::euclidean(), 30);
  const std::string svg = family_svg(family);
  // Every level repeats the same chord: boundary plus one path.
  EXPECT_EQ(distinct_curves(family).size(), 1u);
  EXPECT_EQ(count(svg, "<path"), 2u);
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  EXPECT_NO_THROW(boost::property_tree::read_xml(in, tree));
  EXPECT_EQ(tree.count("svg"), 1u);

  const auto brothers = sweep(brothers_datum(0.0), disk, Anisotropy::euclidean(), 10);
  EXPECT_EQ(count(family_svg(brothers), "<path"), 1u + distinct_curves(brothers).size());
  EXPECT_EQ(distinct_curves(brothers).size(), 20u);
}

TEST(Output, GridCsvHasInsideCellsOnly) {
  const auto disk = ConvexDomain::unit_disk();
  const auto u = SolutionField::sample(disk, Anisotropy::euclidean(), {32, 32}, [](Point x) { return x.x; });
  const std::string csv = grid_csv(u);
  std::size_t inside = 0;
  for (auto m : u.mask()) inside += m;
  EXPECT_EQ(csv.rfind("x,y,u\n", 0), 0u);
  EXPECT_EQ(count(csv, "\n"), inside + 1);
}

TEST(Output, WriteJsonCreatesDirectories) {
  const auto dir = scratch_dir("write");
  write_json(dir / "a" / "b" / "out.json", json{{"k", 1}});
  std::ifstream in(dir / "a" / "b" / "out.json");
  EXPECT_EQ(json::parse(in).at("k"), 1);
  std::filesystem::remove_all(dir);
}
