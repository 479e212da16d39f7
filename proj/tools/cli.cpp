#include "cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "hexopt/error.hpp"
#include "hexopt/fixtures.hpp"
#include "hexopt/io.hpp"
#include "hexopt/projection.hpp"
#include "hexopt/quality.hpp"

namespace hexopt::cli {

namespace {

struct Inputs {
  TriSurface surface;
  HexMesh mesh;
  FeatureBindings features;
};

Inputs load_inputs(const std::string& tri_path, const std::string& hex_path, const std::string& features_path) {
  Inputs in;
  in.surface = io::read_tri_obj(tri_path);
  in.mesh = io::read_hex_vtk(hex_path);
  if (!features_path.empty()) in.features = io::read_features(features_path, in.surface, in.mesh);
  annotate_features(in.surface, in.features);
  const auto violations = validate_tri_surface(in.surface);
  if (!violations.empty()) {
    std::string msg = tri_path + ": surface is not valid:";
    for (const auto& v : violations) msg += "\n  " + v.message;
    throw MeshError(msg);
  }
  return in;
}

// Boundary distance of 1e-8 of the bounding-box diagonal counts as on-surface.
constexpr double kMaxDistTolerance = 1e-8;

}  // namespace

int cmd_optimize(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Inputs in;
  SurfaceBinding binding;
  try {
    in = load_inputs(config.tri_path, config.hex_path, config.features_path);
    if (config.magnitude > 0.0) in.mesh = perturb_interior(in.mesh, config.magnitude, config.seed);
    binding = classify_boundary_vertices(in.mesh, extract_boundary(in.mesh), in.surface, in.features);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  const QualityReport pre = quality_report(in.mesh, in.surface, binding);
  OptimizeResult result;
  try {
    result = optimize(in.mesh, in.surface, binding, config.optimizer);
  } catch (const OptimizationError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  const bool ok = result.success && result.report.max_dist <= kMaxDistTolerance &&
                  result.report.min_scaled_jacobian > 0.0;
  const std::vector<io::ReportRow> rows = {
      {"pre", "n/a", 0.0, pre},
      {"post", ok ? "ok" : "failed", result.theta, result.report},
  };
  try {
    if (!config.out_path.empty()) io::write_hex_vtk(config.out_path, result.mesh);
    if (!config.report_path.empty()) io::write_report(config.report_path, rows);
    if (!config.log_path.empty()) io::write_convergence(config.log_path, result.log, config.timing);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  out << "levels completed: " << (result.success ? result.theta / config.optimizer.theta_step + 1 : 0)
      << ", theta " << result.theta << ", iterations " << result.total_iterations << "\n";
  out << "SJ [" << pre.min_scaled_jacobian << ", " << pre.max_scaled_jacobian << "] -> ["
      << result.report.min_scaled_jacobian << ", " << result.report.max_scaled_jacobian << "], maxDist "
      << pre.max_dist << " -> " << result.report.max_dist << "\n";
  err << "wall time " << result.wall_time << " s\n";
  if (!ok) {
    err << "optimization failed: "
        << (result.success ? "post-conditions not met" : "no threshold level converged (untangling failed)") << "\n";
    return kOptimizationFailed;
  }
  return kSuccess;
}

int cmd_perturb(const std::string& hex_path, const std::string& out_path, double magnitude, std::uint64_t seed,
                std::ostream& err) {
  try {
    if (magnitude < 0.0) throw std::invalid_argument("magnitude must be non-negative");
    io::write_hex_vtk(out_path, perturb_interior(io::read_hex_vtk(hex_path), magnitude, seed));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kSuccess;
}

int cmd_generate(const std::string& fixture, int resolution, const std::string& tri_path,
                 const std::string& hex_path, const std::string& features_path, std::ostream& err) {
  try {
    if (resolution < 2) throw std::invalid_argument("resolution must be at least 2");
    Fixture fx;
    if (fixture == "cube-grid") {
      fx = cube_grid_fixture(resolution);
    } else if (fixture == "sphere") {
      fx = sphere_fixture(resolution);
    } else if (fixture == "l-bracket") {
      fx = l_bracket_fixture(resolution);
    } else {
      throw std::invalid_argument("unknown fixture '" + fixture + "'");
    }
    io::write_tri_obj(tri_path, fx.surface);
    io::write_hex_vtk(hex_path, fx.mesh);
    if (!features_path.empty()) io::write_features(features_path, fx.features);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kSuccess;
}

int cmd_report(const std::string& tri_path, const std::string& hex_path, const std::string& features_path,
               const std::string& report_path, std::ostream& out, std::ostream& err) {
  try {
    const Inputs in = load_inputs(tri_path, hex_path, features_path);
    const auto binding = classify_boundary_vertices(in.mesh, extract_boundary(in.mesh), in.surface, in.features);
    const auto report = quality_report(in.mesh, in.surface, binding);
    const std::vector<io::ReportRow> rows = {{"report", "n/a", 0.0, report}};
    if (report_path.empty()) {
      out << io::format_report(rows);
    } else {
      io::write_report(report_path, rows);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kSuccess;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hexopt: all-hex mesh quality improvement with exact surface fitting"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string optimizer = "lbfgs";
  std::string sample_mode = "argmin";
  auto* opt = app.add_subcommand("optimize", "Optimize a hex mesh against a triangle surface");
  opt->add_option("--tri", rc.tri_path, "Triangle surface (.obj)")->required();
  opt->add_option("--hex", rc.hex_path, "Hex mesh (legacy VTK)")->required();
  opt->add_option("--features", rc.features_path, "Feature binding sidecar");
  opt->add_option("--out", rc.out_path, "Optimized hex mesh output");
  opt->add_option("--report", rc.report_path, "Quality report output (pre and post rows)");
  opt->add_option("--log", rc.log_path, "Convergence log output");
  opt->add_option("--theta-step", rc.optimizer.theta_step, "Threshold increment")->capture_default_str();
  opt->add_option("--theta-max", rc.optimizer.theta_max, "Largest threshold attempted")->capture_default_str();
  opt->add_option("--optimizer", optimizer, "lbfgs or gd")
      ->check(CLI::IsMember({"lbfgs", "gd"}))
      ->capture_default_str();
  opt->add_option("--history", rc.optimizer.history, "L-BFGS memory")->capture_default_str();
  opt->add_option("--budget", rc.optimizer.budget, "Inner iterations per threshold level")->capture_default_str();
  opt->add_option("--eta", rc.optimizer.eta, "Backtracking factor")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6))
      ->capture_default_str();
  opt->add_option("--c1", rc.optimizer.c1, "Armijo constant")->check(CLI::Range(1e-12, 1.0 - 1e-12))->capture_default_str();
  opt->add_option("--rho0", rc.optimizer.rho0, "Initial penalty")->check(CLI::PositiveNumber)->capture_default_str();
  opt->add_option("--rho-max", rc.optimizer.rho_max, "Penalty cap")->check(CLI::PositiveNumber)->capture_default_str();
  opt->add_option("--step-floor", rc.optimizer.step_floor, "Smallest line-search step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  opt->add_option("--residual-tol", rc.optimizer.residual_tol, "Constraint residual tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  opt->add_option("--smoothing-period", rc.optimizer.smoothing_period, "Iterations between smoothing sweeps (0: off)")
      ->capture_default_str();
  opt->add_option("--sample-mode", sample_mode, "argmin or all")->check(CLI::IsMember({"argmin", "all"}));
  opt->add_flag("--reset-multipliers", rc.optimizer.reset_multipliers, "Reset lambda and rho at each level");
  opt->add_option("--magnitude", rc.magnitude, "Tangle interior vertices first (fraction of edge length)")
      ->check(CLI::NonNegativeNumber);
  opt->add_option("--seed", rc.seed, "Seed for --magnitude");
  opt->add_flag("--timing", rc.timing, "Record wall time in the convergence log");

  std::string hex_in;
  std::string hex_out;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  auto* perturb = app.add_subcommand("perturb", "Tangle interior vertices of a hex mesh");
  perturb->add_option("--hex", hex_in, "Input hex mesh")->required();
  perturb->add_option("--out", hex_out, "Output hex mesh")->required();
  perturb->add_option("--magnitude", magnitude, "Displacement radius as a fraction of mean incident edge length")
      ->required()
      ->check(CLI::NonNegativeNumber);
  perturb->add_option("--seed", seed, "Random seed")->capture_default_str();

  std::string fixture;
  int resolution = 3;
  std::string tri_out;
  std::string features_out;
  auto* generate = app.add_subcommand("generate", "Write a fixture: surface, hex mesh and feature sidecar");
  generate->add_option("fixture", fixture, "cube-grid, sphere or l-bracket")
      ->required()
      ->check(CLI::IsMember({"cube-grid", "sphere", "l-bracket"}));
  generate->add_option("--resolution", resolution, "Hexes per unit length")->capture_default_str();
  generate->add_option("--tri", tri_out, "Surface output (.obj)")->required();
  generate->add_option("--hex", hex_out, "Hex mesh output (.vtk)")->required();
  generate->add_option("--features", features_out, "Feature sidecar output");

  std::string report_tri;
  std::string report_hex;
  std::string report_features;
  std::string report_path;
  auto* report = app.add_subcommand("report", "Evaluate mesh quality and surface deviation");
  report->add_option("--tri", report_tri, "Triangle surface (.obj)")->required();
  report->add_option("--hex", report_hex, "Hex mesh (legacy VTK)")->required();
  report->add_option("--features", report_features, "Feature binding sidecar");
  report->add_option("--report", report_path, "Report output (stdout when omitted)");

  std::vector<std::string> argv_storage = args;
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  if (*opt) {
    rc.optimizer.method = optimizer == "gd" ? Method::GradientDescent : Method::Lbfgs;
    rc.optimizer.sample_mode = sample_mode == "all" ? SampleMode::AllSamples : SampleMode::ArgminOnly;
    return cmd_optimize(rc, out, err);
  }
  if (*perturb) return cmd_perturb(hex_in, hex_out, magnitude, seed, err);
  if (*generate) return cmd_generate(fixture, resolution, tri_out, hex_out, features_out, err);
  return cmd_report(report_tri, report_hex, report_features, report_path, out, err);
}

}  // namespace hexopt::cli
