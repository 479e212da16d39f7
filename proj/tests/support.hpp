#pragma once

#include <optional>
#include <random>
#include <vector>

#include "hexopt/fixtures.hpp"
#include "hexopt/optimizer.hpp"

namespace test_support {

// A perturbed 3x3x3 cube-grid state for gradient checks: boundary vertices
// off their (frozen) targets, random multipliers, penalty and threshold.
struct GradientCase {
  hexopt::HexMesh mesh;
  hexopt::SurfaceBinding binding;
  hexopt::ALParams params;
};

// Empty when the draw lands within 1e-4 of a branch boundary or an argmin
// tie in any hex.
std::optional<GradientCase> gradient_case(std::mt19937_64& rng);

// max relative error ||g_fd - g|| / ||g|| between the analytic gradient and
// central differences (step 1e-6) of an independent evaluation of the
// objective with every hex's mean edge length frozen.
double gradient_relative_error(const GradientCase& c);

// Single hex with reversed orientation whose 8 vertices are pinned to the
// corners of the unit cube: no feasible untangled configuration exists.
struct PinnedCase {
  hexopt::TriSurface surface;
  hexopt::HexMesh mesh;
  hexopt::FeatureBindings features;
  hexopt::SurfaceBinding binding;
};
PinnedCase mirrored_hex_case();

}  // namespace test_support
