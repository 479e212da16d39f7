#include <benchmark/benchmark.h>

#include "hexopt/fixtures.hpp"
#include "hexopt/optimizer.hpp"

using namespace hexopt;

namespace {

struct Problem {
  Fixture fx;
  HexMesh mesh;
  SurfaceBinding binding;
};

Problem sphere_problem(int n) {
  Problem p{sphere_fixture(n), {}, {}};
  p.mesh = perturb_interior(p.fx.mesh, 0.5, 42);
  p.binding = classify_boundary_vertices(p.mesh, extract_boundary(p.mesh), p.fx.surface, p.fx.features);
  return p;
}

}  // namespace

static void BM_EnergyAndGradient(benchmark::State& state) {
  const Problem p = sphere_problem(static_cast<int>(state.range(0)));
  ALParams params;
  params.theta = 0.2;
  params.rho = 1.0;
  params.lambda.assign(p.binding.size(), Vec3{0, 0, 0});
  for (auto _ : state) benchmark::DoNotOptimize(al_energy_and_gradient(p.mesh, p.binding, params));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.mesh.hexes.size()));
}
BENCHMARK(BM_EnergyAndGradient)->Arg(5)->Arg(10)->Arg(20);

// Untangling only: the schedule stops after the first completed level.
static void BM_Untangle(benchmark::State& state) {
  const Problem p = sphere_problem(5);
  OptimizerConfig cfg;
  cfg.theta_max = 0.0;
  cfg.method = state.range(0) == 0 ? Method::Lbfgs : Method::GradientDescent;
  for (auto _ : state) benchmark::DoNotOptimize(optimize(p.mesh, p.fx.surface, p.binding, cfg));
  state.SetLabel(state.range(0) == 0 ? "lbfgs" : "gd");
}
BENCHMARK(BM_Untangle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
