#include <benchmark/benchmark.h>

#include "hexopt/fixtures.hpp"
#include "hexopt/quality.hpp"

using namespace hexopt;

static void BM_HexQuality(benchmark::State& state) {
  const HexMesh mesh = perturb_interior(grid_mesh(4, 4, 4), 0.4, 1);
  for (auto _ : state) {
    for (std::size_t h = 0; h < mesh.hexes.size(); ++h) benchmark::DoNotOptimize(hex_quality(mesh.corners(h)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.hexes.size()));
}
BENCHMARK(BM_HexQuality);

static void BM_RehqjGradient(benchmark::State& state) {
  const HexMesh mesh = perturb_interior(grid_mesh(4, 4, 4), 0.4, 2);
  for (auto _ : state) {
    for (std::size_t h = 0; h < mesh.hexes.size(); ++h) benchmark::DoNotOptimize(rehqj_gradient(mesh.corners(h), 0.3));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.hexes.size()));
}
BENCHMARK(BM_RehqjGradient);

static void BM_MeshMinScaledJacobian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HexMesh mesh = grid_mesh(n, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(mesh_min_scaled_jacobian(mesh));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.hexes.size()));
}
BENCHMARK(BM_MeshMinScaledJacobian)->Arg(8)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
