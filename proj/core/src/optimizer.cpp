#include "hexopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>

#include "hexopt/error.hpp"

namespace hexopt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> negated(std::span<const double> g) {
  std::vector<double> out(g.size());
  std::transform(g.begin(), g.end(), out.begin(), [](double x) { return -x; });
  return out;
}

std::vector<double> flatten(std::span<const Vec3> pts) {
  std::vector<double> z(3 * pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    z[3 * i] = pts[i].x;
    z[3 * i + 1] = pts[i].y;
    z[3 * i + 2] = pts[i].z;
  }
  return z;
}

void unflatten(std::span<const double> z, std::span<Vec3> pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {z[3 * i], z[3 * i + 1], z[3 * i + 2]};
}

}  // namespace

void LbfgsHistory::push(std::vector<double> s, std::vector<double> y) {
  if (capacity_ == 0) return;
  const double ys = dot(y, s);
  const double scale = std::sqrt(dot(y, y) * dot(s, s));
  Pair p{std::move(s), std::move(y), 0.0};
  p.rho = ys > 1e-12 * scale ? 1.0 / ys : 1e8;
  if (pairs_.size() == capacity_) pairs_.pop_front();
  pairs_.push_back(std::move(p));
}

std::vector<double> lbfgs_direction(std::span<const double> gradient, LbfgsHistory& history) {
  const std::size_t m = history.size();
  if (m == 0) return negated(gradient);

  std::vector<double> q(gradient.begin(), gradient.end());
  std::vector<double> alpha(m);
  for (std::size_t i = m; i-- > 0;) {
    const auto& p = history[i];
    alpha[i] = p.rho * dot(p.s, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * p.y[j];
  }

  const auto& last = history[m - 1];
  const double yy = dot(last.y, last.y);
  double gamma = yy > 0.0 ? dot(last.s, last.y) / yy : 1.0;
  if (!(gamma > 0.0) || !std::isfinite(gamma)) gamma = 1.0;
  for (double& v : q) v *= gamma;

  for (std::size_t i = 0; i < m; ++i) {
    const auto& p = history[i];
    const double beta = p.rho * dot(p.y, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += p.s[j] * (alpha[i] - beta);
  }

  if (!all_finite(q)) {
    history.clear();
    return negated(gradient);
  }
  for (double& v : q) v = -v;
  return q;
}

double al_energy(std::span<const Vec3> positions, std::span<const Hex> hexes, const SurfaceBinding& binding,
                 const ALParams& params, SampleMode mode) {
  double quality = 0.0;
  for (const auto& hex : hexes) {
    HexCorners x;
    for (int i = 0; i < 8; ++i) x[i] = positions[hex[i]];
    quality += element_energy(hex_quality(x), params.theta, mode);
  }
  double constraint = 0.0;
  for (std::size_t i = 0; i < binding.entries.size(); ++i) {
    const auto& e = binding.entries[i];
    const Vec3 r = positions[e.vertex] - e.target;
    const Vec3 lambda = i < params.lambda.size() ? params.lambda[i] : Vec3{};
    constraint += hexopt::dot(lambda, r) + 0.5 * params.rho * squared_norm(r);
  }
  return -quality + constraint;
}

ALEvaluation al_energy_and_gradient(std::span<const Vec3> positions, std::span<const Hex> hexes,
                                    const SurfaceBinding& binding, const ALParams& params, SampleMode mode) {
  ALEvaluation out;
  out.gradient.assign(3 * positions.size(), 0.0);
  double quality = 0.0;
  for (const auto& hex : hexes) {
    HexCorners x;
    for (int i = 0; i < 8; ++i) x[i] = positions[hex[i]];
    const auto hq = hex_quality(x);
    quality += element_energy(hq, params.theta, mode);
    const auto g = element_gradient(x, hq, params.theta, mode);
    for (int i = 0; i < 8; ++i) {
      double* dst = &out.gradient[3 * hex[i]];
      dst[0] -= g[i].x;
      dst[1] -= g[i].y;
      dst[2] -= g[i].z;
    }
  }
  double constraint = 0.0;
  for (std::size_t i = 0; i < binding.entries.size(); ++i) {
    const auto& e = binding.entries[i];
    const Vec3 r = positions[e.vertex] - e.target;
    const Vec3 lambda = i < params.lambda.size() ? params.lambda[i] : Vec3{};
    constraint += hexopt::dot(lambda, r) + 0.5 * params.rho * squared_norm(r);
    const Vec3 g = lambda + params.rho * r;
    double* dst = &out.gradient[3 * e.vertex];
    dst[0] += g.x;
    dst[1] += g.y;
    dst[2] += g.z;
  }
  out.energy = -quality + constraint;
  return out;
}

ArmijoResult backtrack(const std::function<double(double)>& phi, double phi0, double slope,
                       const LineSearchSettings& settings) {
  ArmijoResult r;
  double a = 1.0;
  for (;;) {
    const double value = phi(a);
    ++r.trials;
    if (value - phi0 <= settings.c1 * a * slope) {
      r.step = a;
      r.energy = value;
      r.satisfied = true;
      return r;
    }
    if (a <= settings.floor) {
      r.step = a;
      r.energy = value;
      r.floored = true;
      return r;
    }
    a *= settings.eta;
  }
}

ArmijoResult armijo_search(const Objective& f, std::span<const double> z, std::span<double> direction, double energy,
                           std::span<const double> gradient, const LineSearchSettings& settings) {
  double slope = dot(direction, gradient);
  bool reversed = false;
  if (!(slope < 0.0)) {
    std::transform(gradient.begin(), gradient.end(), direction.begin(), [](double g) { return -g; });
    slope = dot(direction, gradient);
    reversed = true;
  }
  std::vector<double> trial(z.size());
  auto phi = [&](double a) {
    for (std::size_t i = 0; i < z.size(); ++i) trial[i] = z[i] + a * direction[i];
    return f(trial);
  };
  auto r = backtrack(phi, energy, slope, settings);
  r.reversed = reversed;
  return r;
}

void update_multipliers_and_penalty(ALParams& params, const SurfaceBinding& binding, const HexMesh& mesh,
                                    double rho_max) {
  params.lambda.resize(binding.entries.size());
  for (std::size_t i = 0; i < binding.entries.size(); ++i) {
    const auto& e = binding.entries[i];
    params.lambda[i] += params.rho * (mesh.vertices[e.vertex] - e.target);
  }
  if (resj_target_met(mesh, params.theta)) params.rho = std::min(2.0 * params.rho, rho_max);
}

namespace {

double incident_min_sj(const HexMesh& mesh, std::span<const Index> hexes) {
  double m = HUGE_VAL;
  for (Index h : hexes) m = std::min(m, hex_quality(mesh.corners(h)).scaled_jacobian);
  return m;
}

}  // namespace

bool smart_laplacian_move(HexMesh& mesh, const MeshTopology& topology, const SurfaceBinding& binding,
                          const TriSurface& surface, const TriangleBVH& bvh, Index v) {
  const auto& nbrs = topology.neighbors[v];
  if (nbrs.empty()) return false;
  Vec3 candidate;
  for (Index n : nbrs) candidate += mesh.vertices[n];
  candidate = candidate / static_cast<double>(nbrs.size());
  if (binding.is_boundary(v)) {
    candidate = feature_target(binding.entries[static_cast<std::size_t>(binding.slot[v])], candidate, surface, bvh);
  }
  const Vec3 old = mesh.vertices[v];
  if (candidate == old) return false;
  const double before = incident_min_sj(mesh, topology.vertex_hexes[v]);
  mesh.vertices[v] = candidate;
  if (incident_min_sj(mesh, topology.vertex_hexes[v]) >= before) return true;
  mesh.vertices[v] = old;
  return false;
}

SmoothingStats smart_laplacian_smoothing(HexMesh& mesh, const MeshTopology& topology, const SurfaceBinding& binding,
                                         const TriSurface& surface, const TriangleBVH& bvh) {
  SmoothingStats stats;
  stats.min_before = mesh_min_scaled_jacobian(mesh);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (smart_laplacian_move(mesh, topology, binding, surface, bvh, static_cast<Index>(v))) ++stats.moves;
  }
  stats.min_after = mesh_min_scaled_jacobian(mesh);
  return stats;
}

namespace {

// Positions with every boundary vertex placed on its target.
HexMesh snapped(const HexMesh& mesh, const SurfaceBinding& binding) {
  HexMesh out = mesh;
  for (const auto& e : binding.entries) out.vertices[e.vertex] = e.target;
  return out;
}

bool level_satisfied(const HexMesh& mesh, double theta) {
  return mesh_min_scaled_jacobian(mesh) >= theta - 1e-12;
}

}  // namespace

OptimizeResult optimize(const HexMesh& input, const TriSurface& surface, SurfaceBinding binding,
                        const OptimizerConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  for (const auto& v : input.vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
      throw OptimizationError("input mesh has a non-finite vertex coordinate");
    }
  }

  OptimizeResult result;
  HexMesh work = input;
  const TriangleBVH bvh(surface);
  const MeshTopology topology = build_topology(work);
  const double diagonal = surface.diagonal();

  ALParams params;
  params.rho = config.rho0;
  params.c1 = config.c1;
  params.eta = config.eta;
  params.step_floor = config.step_floor;
  params.lambda.assign(binding.size(), Vec3{});
  const LineSearchSettings search{config.c1, config.eta, config.step_floor};

  LbfgsHistory history(config.method == Method::Lbfgs ? config.history : 0);
  std::vector<Vec3> trial_positions(work.vertices.size());
  auto energy_at = [&](std::span<const double> z) {
    unflatten(z, trial_positions);
    return al_energy(trial_positions, work.hexes, binding, params, config.sample_mode);
  };

  std::optional<HexMesh> snapshot;
  std::size_t k = 0;
  for (std::size_t level = 0;; ++level) {
    const double theta = static_cast<double>(level) * config.theta_step;
    if (theta > config.theta_max + 1e-12) break;
    params.theta = theta;
    history.clear();
    if (config.reset_multipliers && level > 0) {
      params.rho = config.rho0;
      params.lambda.assign(binding.size(), Vec3{});
    }

    LevelRecord record;
    record.theta = theta;
    for (;;) {
      compute_targets(binding, work.vertices, surface, bvh);
      const double residual = max_residual(binding, work.vertices);
      // Per-hex form of sum ReSJ = N_h theta (implies the summed test).
      if (residual <= config.residual_tol && level_satisfied(work, theta)) {
        record.converged = true;
        break;
      }
      if (record.iterations >= config.budget) break;

      update_multipliers_and_penalty(params, binding, work, config.rho_max);
      const auto eval = al_energy_and_gradient(work.vertices, work.hexes, binding, params, config.sample_mode);
      if (!std::isfinite(eval.energy) || !all_finite(eval.gradient)) {
        throw OptimizationError("objective is not finite at iteration " + std::to_string(k));
      }

      const auto z = flatten(work.vertices);
      auto direction = history.capacity() > 0 ? lbfgs_direction(eval.gradient, history) : negated(eval.gradient);
      const auto step = armijo_search(energy_at, z, direction, eval.energy, eval.gradient, search);

      if (step.step > config.step_floor) {
        ++result.diagnostics.armijo_checks;
        const double slope = dot(direction, eval.gradient);
        if (!(step.energy - eval.energy <= config.c1 * step.step * slope)) ++result.diagnostics.armijo_violations;
      }
      if (step.floored) ++result.diagnostics.floored_steps;

      std::vector<double> z_new(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) z_new[i] = z[i] + step.step * direction[i];
      unflatten(z_new, work.vertices);

      if (history.capacity() > 0) {
        const auto next = al_energy_and_gradient(work.vertices, work.hexes, binding, params, config.sample_mode);
        std::vector<double> s(z.size());
        std::vector<double> y(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
          s[i] = z_new[i] - z[i];
          y[i] = next.gradient[i] - eval.gradient[i];
        }
        history.push(std::move(s), std::move(y));
      }

      if (config.smoothing_period > 0 && k % config.smoothing_period == 0) {
        const auto stats = smart_laplacian_smoothing(work, topology, binding, surface, bvh);
        ++result.diagnostics.smoothing_sweeps;
        result.diagnostics.smoothing_moves += stats.moves;
        if (stats.min_after < stats.min_before) ++result.diagnostics.smoothing_violations;
      }

      ConvergenceRecord row;
      row.iteration = k;
      row.theta = theta;
      row.rho = params.rho;
      row.energy = step.energy;
      row.min_scaled_jacobian = mesh_min_scaled_jacobian(work);
      row.max_dist = max_residual(binding, work.vertices) / diagonal;
      row.step = step.step;
      row.wall_time = elapsed();
      result.log.records.push_back(row);

      ++k;
      ++record.iterations;
    }

    record.min_scaled_jacobian = mesh_min_scaled_jacobian(work);
    record.max_residual = max_residual(binding, work.vertices);
    result.levels.push_back(record);
    if (!record.converged) break;

    result.success = true;
    result.theta = theta;
    HexMesh exact = snapped(work, binding);
    snapshot = level_satisfied(exact, theta) ? std::move(exact) : work;
  }

  result.total_iterations = k;
  result.mesh = snapshot ? *snapshot : work;
  result.report = quality_report(result.mesh, surface, binding);
  result.wall_time = elapsed();
  return result;
}

}  // namespace hexopt
