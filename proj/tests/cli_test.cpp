#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "planwarp/annotate.hpp"
#include "planwarp/map_io.hpp"
#include "planwarp/mapping.hpp"
#include "test_util.hpp"

using namespace planwarp;
namespace fs = std::filesystem;

namespace {

const fs::path kDemo = fs::path(PLANWARP_FIXTURE_DIR) / "demo";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::vector<Point2> kSquare{{0, 0}, {10, 0}, {10, 10}, {0, 10}};

fs::path session_with(const pwtest::TempDir& dir, const std::vector<Point2>& plan, const std::vector<Point2>& grid,
                      std::vector<Region> regions = {}) {
  const FloorPlan fp{20, 20, {}, std::nullopt};
  const OccupancyGrid g({20, 20, 1.0, {0, 0}}, {}, CellState::Free);
  SessionFile s;
  for (std::size_t i = 0; i < plan.size(); ++i) s.correspondences.push_back({plan[i], grid[i]});
  s.regions = std::move(regions);
  return pwtest::write_session(dir.path(), fp, g, s);
}

}  // namespace

TEST(Cli, BuildReportsTrianglesAndWritesMapping) {
  pwtest::TempDir dir;
  const auto r = run({"build", (kDemo / "session.json").string(), "--out", (dir / "m.json").string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("triangles: 2"), std::string::npos);
  EXPECT_NE(r.out.find("orientation: mirrored"), std::string::npos);
  const auto ls = load_session(kDemo / "session.json");
  const auto lib = PiecewiseAffineMap::build({ls.file.correspondences, {}});
  EXPECT_EQ(read_text_file(dir / "m.json"), serialize_mapping(lib));
}

TEST(Cli, BuildFailures) {
  pwtest::TempDir dir;
  const auto collinear = session_with(dir, {{0, 0}, {1, 1}, {2, 2}}, {{0, 0}, {1, 0}, {0, 1}});
  EXPECT_EQ(run({"build", collinear.string()}).code, cli::kExitInvalid);

  pwtest::TempDir dir2;
  // Delaunay diagonal is (10,0)-(0,10); dragging the far corner across it folds.
  const std::vector<Point2> kite{{0, 0}, {10, 0}, {0, 10}, {12, 12}};
  auto grid = kite;
  grid[3] = {3, 3};
  const auto folded = session_with(dir2, kite, grid);
  const auto r = run({"build", folded.string()});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("fold_over"), std::string::npos);
  EXPECT_NE(r.err.find("vertices:"), std::string::npos);

  EXPECT_EQ(run({"build", "/nonexistent/session.json"}).code, cli::kExitIo);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitInvalid);
}

TEST(Cli, MapEchoesDoublesAndMarksOutside) {
  pwtest::TempDir dir;
  std::vector<Point2> doubled;
  for (Point2 p : kSquare) doubled.push_back(2.0 * p);
  const auto ident = PiecewiseAffineMap::build(pwtest::correspondences(kSquare, kSquare));
  const auto twice = PiecewiseAffineMap::build(pwtest::correspondences(kSquare, doubled));
  write_file(dir / "ident.json", serialize_mapping(ident));
  write_file(dir / "twice.json", serialize_mapping(twice));
  write_file(dir / "pts.csv", std::string("x,y\n1.5,2.25\n3,4\n20,1\n"));

  const auto echo = run({"map", (dir / "ident.json").string(), (dir / "pts.csv").string(), "--dir", "fwd"});
  EXPECT_EQ(echo.code, 0) << echo.err;
  EXPECT_EQ(echo.out, "x,y\n1.5,2.25\n3,4\noutside\n");
  const auto dbl = run({"map", (dir / "twice.json").string(), (dir / "pts.csv").string(), "--dir", "fwd"});
  EXPECT_EQ(dbl.out, "x,y\n3,4.5\n6,8\noutside\n");
  const auto inv = run({"map", (dir / "twice.json").string(), (dir / "pts.csv").string(), "--dir", "inv", "--out",
                        (dir / "o.csv").string()});
  EXPECT_EQ(inv.code, 0);
  EXPECT_EQ(read_text_file(dir / "o.csv"), "x,y\n0.75,1.125\n1.5,2\n10,0.5\n");

  write_file(dir / "bad.csv", std::string("x,y\n1,abc\n"));
  EXPECT_EQ(run({"map", (dir / "ident.json").string(), (dir / "bad.csv").string(), "--dir", "fwd"}).code, cli::kExitIo);
  EXPECT_EQ(run({"map", (dir / "ident.json").string(), (dir / "pts.csv").string(), "--dir", "up"}).code,
            cli::kExitInvalid);
}

TEST(Cli, NogoWithoutRegionsCopiesInput) {
  pwtest::TempDir bare;
  auto ls = load_session(kDemo / "session.json");
  ls.file.regions.clear();
  const auto path = pwtest::write_session(bare.path(), ls.plan, ls.grid, ls.file);
  pwtest::TempDir out;
  const auto r2 = run({"nogo", path.string(), "--out", out.path().string()});
  EXPECT_EQ(r2.out, "flipped: 0\n");
  EXPECT_EQ(read_binary_file(out / "map.pgm"), read_binary_file(kDemo / "map.pgm"));
  EXPECT_EQ(read_text_file(out / "map.yaml"), read_text_file(kDemo / "map.yaml"));
}

TEST(Cli, NogoNineCenterSquareMatchesOracle) {
  pwtest::TempDir dir;
  const Region sq{"sq", {{2, 2}, {5, 2}, {5, 5}, {2, 5}}, RegionKind::NoGo};
  const auto path = session_with(dir, kSquare, kSquare, {sq});
  pwtest::TempDir out;
  const auto r = run({"nogo", path.string(), "--out", out.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::set<std::size_t> cells;
  const GridFrame f{20, 20, 1.0, {0, 0}};
  for (auto c : oracle::interior_cells(sq.polygon, f)) cells.insert(c);
  EXPECT_EQ(oracle::interior_cells(sq.polygon, f).size(), 9u);
  for (auto c : oracle::boundary_cells(sq.polygon, f)) cells.insert(c);
  EXPECT_EQ(r.out, "flipped: " + std::to_string(cells.size()) + "\n");
  const auto burned = load_grid(out / "map.yaml");
  for (std::size_t c : cells) EXPECT_EQ(burned.at(c), CellState::Occupied);
  EXPECT_EQ(run({"nogo", "/nonexistent.json", "--out", out.path().string()}).code, cli::kExitIo);
}

TEST(Cli, OverlayDeterministicAndPose) {
  pwtest::TempDir dir;
  const std::string session = (kDemo / "session.json").string();
  EXPECT_EQ(run({"overlay", session, "--out", (dir / "a.png").string()}).code, 0);
  EXPECT_EQ(run({"overlay", session, "--out", (dir / "b.png").string()}).code, 0);
  EXPECT_EQ(read_binary_file(dir / "a.png"), read_binary_file(dir / "b.png"));
  EXPECT_EQ(run({"overlay", session, "--out", (dir / "c.png").string(), "--pose", "1,1,0.5"}).code, 0);
  EXPECT_NE(read_binary_file(dir / "a.png"), read_binary_file(dir / "c.png"));
  EXPECT_EQ(run({"overlay", session, "--pose", "1,1"}).code, cli::kExitIo);

  pwtest::TempDir few;
  const auto two = session_with(few, {{0, 0}, {1, 0}}, {{0, 0}, {1, 0}});
  EXPECT_EQ(run({"overlay", two.string(), "--out", (few / "x.png").string()}).code, cli::kExitInvalid);
}

TEST(Cli, BinaryExitCodes) {
  const std::string tool = PLANWARP_TOOL_PATH;
  EXPECT_EQ(std::system((tool + " build " + (kDemo / "session.json").string() + " > /dev/null 2>&1").c_str()), 0);
  const int rc = std::system((tool + " build /nonexistent.json > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(rc), cli::kExitIo);
  const int usage = std::system((tool + " > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(usage), cli::kExitInvalid);
}
