#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hexopt/optimizer.hpp"

namespace hexopt::cli {

// Exit codes.
inline constexpr int kSuccess = 0;
inline constexpr int kInputError = 1;
inline constexpr int kOptimizationFailed = 2;

struct RunConfig {
  std::string tri_path;
  std::string hex_path;
  std::string features_path;  // optional
  std::string out_path;
  std::string report_path;
  std::string log_path;
  OptimizerConfig optimizer;
  double magnitude = 0.0;  // optional interior tangling before optimizing
  std::uint64_t seed = 0;
  bool timing = false;  // add wall_time to the convergence log
};

int cmd_optimize(const RunConfig& config, std::ostream& out, std::ostream& err);

int cmd_perturb(const std::string& hex_path, const std::string& out_path, double magnitude, std::uint64_t seed,
                std::ostream& err);

int cmd_generate(const std::string& fixture, int resolution, const std::string& tri_path,
                 const std::string& hex_path, const std::string& features_path, std::ostream& err);

int cmd_report(const std::string& tri_path, const std::string& hex_path, const std::string& features_path,
               const std::string& report_path, std::ostream& out, std::ostream& err);

// Full command line, args[0] being the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hexopt::cli
