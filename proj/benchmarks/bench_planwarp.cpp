#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "planwarp/annotate.hpp"
#include "planwarp/mapping.hpp"
#include "planwarp/raster.hpp"

using namespace planwarp;

namespace {

/// Jittered lattice over a 1000 x 800 px plan, mapped to a y-up grid with a
/// gentle sinusoidal warp.
CorrespondenceSet warped_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int cols = std::max(2, static_cast<int>(std::lround(std::sqrt(n * 1.25))));
  const int rows = std::max(2, static_cast<int>((n + cols - 1) / cols));
  const double dx = 1000.0 / (cols - 1), dy = 800.0 / (rows - 1);
  std::uniform_real_distribution<double> j(-0.2, 0.2);
  CorrespondenceSet cs;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const bool edge = r == 0 || c == 0 || r == rows - 1 || c == cols - 1;
      const Point2 p{c * dx + (edge ? 0 : j(rng) * dx), r * dy + (edge ? 0 : j(rng) * dy)};
      cs.pairs.push_back({p, {p.x * 0.02 + 0.05 * std::sin(p.y / 300), (800 - p.y) * 0.02 + 0.05 * std::cos(p.x / 300)}});
    }
  }
  return cs;
}

void BM_BuildMap(benchmark::State& state) {
  const auto cs = warped_set(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(PiecewiseAffineMap::build(cs));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildMap)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

void BM_Forward(benchmark::State& state) {
  const auto m = PiecewiseAffineMap::build(warped_set(static_cast<std::size_t>(state.range(0)), 2));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0, 1000), uy(0, 800);
  std::vector<Point2> pts(1024);
  for (Point2& p : pts) p = {ux(rng), uy(rng)};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(pts[i++ % pts.size()]));
}
BENCHMARK(BM_Forward)->RangeMultiplier(4)->Range(4, 1024);

void BM_BurnRegion(benchmark::State& state) {
  const auto m = PiecewiseAffineMap::build(warped_set(64, 4));
  const int side = static_cast<int>(state.range(0));
  const OccupancyGrid grid({side, side * 4 / 5, 20.0 / side, {0, 0}}, {}, CellState::Free);
  std::vector<Point2> ring;
  for (int k = 0; k < 24; ++k) {
    const double a = 2 * 3.141592653589793 * k / 24;
    ring.push_back({500 + (200 + 80 * std::sin(3 * a)) * std::cos(a), 400 + (200 + 80 * std::sin(3 * a)) * std::sin(a)});
  }
  const Region r{"blob", ring, RegionKind::NoGo};
  for (auto _ : state) benchmark::DoNotOptimize(burn_region(m, r, grid));
}
BENCHMARK(BM_BurnRegion)->RangeMultiplier(4)->Range(64, 1024);

void BM_Supercover(benchmark::State& state) {
  const GridFrame f{1024, 1024, 0.05, {0, 0}};
  for (auto _ : state) benchmark::DoNotOptimize(supercover_segment({0.3, 0.7}, {49.1, 31.3}, f));
}
BENCHMARK(BM_Supercover);

}  // namespace
BENCHMARK_MAIN();
