#include <benchmark/benchmark.h>

#include <random>

#include "hexopt/fixtures.hpp"
#include "hexopt/projection.hpp"

using namespace hexopt;

namespace {

std::vector<Vec3> queries(std::size_t n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<Vec3> q(n);
  for (auto& p : q) p = {u(rng), u(rng), u(rng)};
  return q;
}

}  // namespace

static void BM_BvhBuild(benchmark::State& state) {
  const TriSurface s = icosphere(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(TriangleBVH(s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.triangles.size()));
}
BENCHMARK(BM_BvhBuild)->DenseRange(2, 5);

static void BM_BvhClosest(benchmark::State& state) {
  const TriSurface s = icosphere(static_cast<int>(state.range(0)));
  const TriangleBVH bvh(s);
  const auto q = queries(1024);
  for (auto _ : state) {
    for (const auto& p : q) benchmark::DoNotOptimize(bvh.closest(p));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(q.size()));
}
BENCHMARK(BM_BvhClosest)->DenseRange(2, 5);

static void BM_BruteForceClosest(benchmark::State& state) {
  const TriSurface s = icosphere(static_cast<int>(state.range(0)));
  const auto q = queries(64);
  for (auto _ : state) {
    for (const auto& p : q) benchmark::DoNotOptimize(closest_point_brute_force(s, p));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(q.size()));
}
BENCHMARK(BM_BruteForceClosest)->DenseRange(2, 4);

BENCHMARK_MAIN();
