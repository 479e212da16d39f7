#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "hexopt/mesh.hpp"
#include "hexopt/projection.hpp"
#include "hexopt/quality.hpp"

namespace hexopt {

enum class Method { Lbfgs, GradientDescent };

struct OptimizerConfig {
  double theta_step = 0.01;
  double theta_max = 1.0;
  std::size_t history = 15;  // L-BFGS memory m
  double rho0 = 1e-8;
  // Gradient descent with per-iteration multiplier updates is unstable once
  // step * rho exceeds 4/3; the quality Hessian is O(1), so a small cap suffices.
  double rho_max = 10.0;
  double c1 = 1e-4;
  double eta = 0.5;  // backtracking factor
  double step_floor = 1e-8;
  double residual_tol = 1e-8;
  std::size_t smoothing_period = 100;
  std::size_t budget = 20000;  // inner iterations per threshold level
  Method method = Method::Lbfgs;
  SampleMode sample_mode = SampleMode::ArgminOnly;
  bool reset_multipliers = false;  // reset lambda and rho at each new level
};

// Augmented Lagrangian state.
struct ALParams {
  double theta = 0.0;
  double rho = 1e-8;
  std::vector<Vec3> lambda;  // one multiplier per boundary vertex (SurfaceBinding order)
  double c1 = 1e-4;
  double step_floor = 1e-8;
  double eta = 0.5;
};

// Ring buffer of the last m curvature pairs, oldest first.
class LbfgsHistory {
 public:
  struct Pair {
    std::vector<double> s;
    std::vector<double> y;
    double rho = 0.0;  // 1 / y.s, or 1e8 when y.s is (relatively) zero
  };

  explicit LbfgsHistory(std::size_t capacity = 15) : capacity_(capacity) {}

  void push(std::vector<double> s, std::vector<double> y);
  void clear() { pairs_.clear(); }

  std::size_t size() const { return pairs_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return pairs_.empty(); }
  const Pair& operator[](std::size_t i) const { return pairs_[i]; }

 private:
  std::size_t capacity_;
  std::deque<Pair> pairs_;
};

// Two-loop recursion. Returns the search direction -H g. On a non-finite
// intermediate the history is cleared and -g is returned.
std::vector<double> lbfgs_direction(std::span<const double> gradient, LbfgsHistory& history);

struct ALEvaluation {
  double energy = 0.0;
  std::vector<double> gradient;  // 3 entries per mesh vertex
};

// L = -sum_h ReHQJ(h) + sum_i [lambda_i . (x_i - x_i^t) + rho/2 |x_i - x_i^t|^2],
// with the targets in `binding` held constant.
double al_energy(std::span<const Vec3> positions, std::span<const Hex> hexes, const SurfaceBinding& binding,
                 const ALParams& params, SampleMode mode = SampleMode::ArgminOnly);

ALEvaluation al_energy_and_gradient(std::span<const Vec3> positions, std::span<const Hex> hexes,
                                    const SurfaceBinding& binding, const ALParams& params,
                                    SampleMode mode = SampleMode::ArgminOnly);

inline ALEvaluation al_energy_and_gradient(const HexMesh& mesh, const SurfaceBinding& binding, const ALParams& params,
                                           SampleMode mode = SampleMode::ArgminOnly) {
  return al_energy_and_gradient(mesh.vertices, mesh.hexes, binding, params, mode);
}

struct LineSearchSettings {
  double c1 = 1e-4;
  double eta = 0.5;
  double floor = 1e-8;
};

struct ArmijoResult {
  double step = 1.0;
  double energy = 0.0;      // objective at the accepted step
  std::size_t trials = 0;   // objective evaluations
  bool satisfied = false;   // sufficient decrease holds at the accepted step
  bool floored = false;     // accepted because the step reached the floor
  bool reversed = false;    // direction was not a descent direction and was replaced by -g
};

// Backtracks a = 1, eta, eta^2, ... on phi(a) until
// phi(a) - phi0 <= c1 a slope, or accepts the first a <= floor.
ArmijoResult backtrack(const std::function<double(double)>& phi, double phi0, double slope,
                       const LineSearchSettings& settings);

using Objective = std::function<double(std::span<const double>)>;

// Armijo search along `direction` from z. Replaces the direction with -g
// first when it is not a descent direction.
ArmijoResult armijo_search(const Objective& f, std::span<const double> z, std::span<double> direction,
                           double energy, std::span<const double> gradient, const LineSearchSettings& settings);

// lambda_i += rho (x_i - x_i^t); rho doubles (up to rho_max) when every hex
// already satisfies SJ(h) >= theta.
void update_multipliers_and_penalty(ALParams& params, const SurfaceBinding& binding, const HexMesh& mesh,
                                    double rho_max = 10.0);

struct SmoothingStats {
  std::size_t moves = 0;
  double min_before = 0.0;
  double min_after = 0.0;
};

// Moves v to the centroid of its edge neighbors (projected onto its feature
// when v is on the boundary) if the minimum scaled Jacobian of the incident
// hexes does not decrease. Returns whether the vertex moved.
bool smart_laplacian_move(HexMesh& mesh, const MeshTopology& topology, const SurfaceBinding& binding,
                          const TriSurface& surface, const TriangleBVH& bvh, Index v);

// One Gauss-Seidel sweep of smart_laplacian_move over all vertices in index order.
SmoothingStats smart_laplacian_smoothing(HexMesh& mesh, const MeshTopology& topology, const SurfaceBinding& binding,
                                         const TriSurface& surface, const TriangleBVH& bvh);

struct ConvergenceRecord {
  std::size_t iteration = 0;
  double theta = 0.0;
  double rho = 0.0;
  double energy = 0.0;
  double min_scaled_jacobian = 0.0;
  double max_dist = 0.0;
  double step = 0.0;
  double wall_time = 0.0;  // seconds since optimize() started
};

struct ConvergenceLog {
  std::vector<ConvergenceRecord> records;
};

struct LevelRecord {
  double theta = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double min_scaled_jacobian = 0.0;  // at exit from the level
  double max_residual = 0.0;
};

struct OptimizeDiagnostics {
  std::size_t armijo_checks = 0;
  std::size_t armijo_violations = 0;  // accepted step above the floor without sufficient decrease
  std::size_t floored_steps = 0;
  std::size_t smoothing_sweeps = 0;
  std::size_t smoothing_violations = 0;  // sweeps that lowered the mesh-wide min SJ
  std::size_t smoothing_moves = 0;
};

struct OptimizeResult {
  HexMesh mesh;  // last level snapshot (or the current state when no level converged)
  ConvergenceLog log;
  QualityReport report;
  bool success = false;  // at least one level converged
  double theta = 0.0;    // highest converged threshold
  std::size_t total_iterations = 0;
  double wall_time = 0.0;
  std::vector<LevelRecord> levels;
  OptimizeDiagnostics diagnostics;
};

// Runs the threshold schedule theta = 0, step, 2 step, ... with warm starts
// until a level fails to converge within the iteration budget or theta
// exceeds theta_max. Throws OptimizationError on non-finite input or objective.
OptimizeResult optimize(const HexMesh& mesh, const TriSurface& surface, SurfaceBinding binding,
                        const OptimizerConfig& config);

}  // namespace hexopt
