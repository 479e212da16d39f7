#include "support.hpp"

#include <algorithm>
#include <cmath>

namespace test_support {

using namespace hexopt;

namespace {

double min_gap(std::array<double, kSampleCount> v) {
  std::sort(v.begin(), v.end());
  return v[1] - v[0];
}

double frozen_objective(std::span<const Vec3> x, const GradientCase& c, const std::vector<double>& ebar) {
  double e = 0.0;
  for (std::size_t h = 0; h < c.mesh.hexes.size(); ++h) {
    HexCorners corners;
    for (int i = 0; i < 8; ++i) corners[i] = x[c.mesh.hexes[h][i]];
    HexQuality hq = hex_quality(corners);
    hq.mean_edge_length = ebar[h];
    e -= rehqj(hq, c.params.theta);
  }
  for (std::size_t i = 0; i < c.binding.size(); ++i) {
    const Vec3 r = x[c.binding.entries[i].vertex] - c.binding.entries[i].target;
    e += dot(c.params.lambda[i], r) + 0.5 * c.params.rho * squared_norm(r);
  }
  return e;
}

}  // namespace

std::optional<GradientCase> gradient_case(std::mt19937_64& rng) {
  Fixture fx = cube_grid_fixture(3);
  std::uniform_real_distribution<double> mag(0.1, 0.6);
  GradientCase c;
  c.mesh = perturb_interior(fx.mesh, mag(rng), rng());
  c.binding = classify_boundary_vertices(c.mesh, extract_boundary(c.mesh), fx.surface, fx.features);

  std::uniform_real_distribution<double> jitter(-0.03, 0.03);
  for (const auto& e : c.binding.entries) {
    c.mesh.vertices[e.vertex] = c.mesh.vertices[e.vertex] + Vec3{jitter(rng), jitter(rng), jitter(rng)};
  }
  const TriangleBVH bvh(fx.surface);
  compute_targets(c.binding, c.mesh.vertices, fx.surface, bvh);

  std::normal_distribution<double> lambda(0.0, 0.1);
  c.params.theta = std::uniform_real_distribution<double>(0.0, 0.8)(rng);
  c.params.rho = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
  c.params.lambda.resize(c.binding.size());
  for (auto& l : c.params.lambda) l = Vec3{lambda(rng), lambda(rng), lambda(rng)};

  for (std::size_t h = 0; h < c.mesh.hexes.size(); ++h) {
    const auto hq = hex_quality(c.mesh.corners(h));
    if (std::abs(hq.jacobian) < 1e-4 || std::abs(hq.scaled_jacobian - c.params.theta) < 1e-4) return std::nullopt;
    if (min_gap(hq.jacobians) < 1e-4 || min_gap(hq.scaled) < 1e-4) return std::nullopt;
  }
  return c;
}

double gradient_relative_error(const GradientCase& c) {
  std::vector<double> ebar(c.mesh.hexes.size());
  for (std::size_t h = 0; h < ebar.size(); ++h) ebar[h] = hex_quality(c.mesh.corners(h)).mean_edge_length;

  const auto eval = al_energy_and_gradient(c.mesh, c.binding, c.params);
  const double h = 1e-6;
  std::vector<Vec3> x = c.mesh.vertices;
  double diff2 = 0.0, norm2 = 0.0;
  for (std::size_t v = 0; v < x.size(); ++v) {
    for (int a = 0; a < 3; ++a) {
      const double keep = x[v][a];
      x[v][a] = keep + h;
      const double fp = frozen_objective(x, c, ebar);
      x[v][a] = keep - h;
      const double fm = frozen_objective(x, c, ebar);
      x[v][a] = keep;
      const double fd = (fp - fm) / (2 * h);
      const double g = eval.gradient[3 * v + static_cast<std::size_t>(a)];
      diff2 += (fd - g) * (fd - g);
      norm2 += g * g;
    }
  }
  // The objective itself must agree with the independent evaluation.
  const double e0 = frozen_objective(x, c, ebar);
  if (std::abs(e0 - eval.energy) > 1e-12 * std::max(1.0, std::abs(e0))) return HUGE_VAL;
  return std::sqrt(diff2 / norm2);
}

PinnedCase mirrored_hex_case() {
  Fixture fx = cube_grid_fixture(1);
  PinnedCase c;
  c.surface = fx.surface;
  c.surface.sharp_curves.clear();
  c.features.corners = fx.features.corners;
  c.mesh = fx.mesh;
  const Hex h = c.mesh.hexes[0];
  c.mesh.hexes[0] = {h[4], h[5], h[6], h[7], h[0], h[1], h[2], h[3]};
  c.binding = classify_boundary_vertices(c.mesh, extract_boundary(c.mesh), c.surface, c.features);
  return c;
}

}  // namespace test_support
