#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "hexopt/mesh.hpp"
#include "hexopt/vec3.hpp"

namespace hexopt {

using HexCorners = std::array<Vec3, 8>;

// Sample points: the eight corners (0..7) and the body center (8).
inline constexpr int kSampleCount = 9;
inline constexpr int kBodyCenter = 8;

// For corner c: {c, n0, n1, n2}, with e_i = x[n_i] - x[c]. Each triple is
// right-handed for a positively oriented hex.
inline constexpr std::array<std::array<int, 4>, 8> kCornerTable = {{
    {0, 1, 3, 4},
    {1, 2, 0, 5},
    {2, 3, 1, 6},
    {3, 0, 2, 7},
    {4, 7, 5, 0},
    {5, 4, 6, 1},
    {6, 5, 7, 2},
    {7, 6, 4, 3},
}};

// Body-center edge vectors run between opposite face centers:
// e_i = mean(kCenterFaces[i][1]) - mean(kCenterFaces[i][0]).
inline constexpr std::array<std::array<std::array<int, 4>, 2>, 3> kCenterFaces = {{
    {{{0, 3, 7, 4}, {1, 2, 6, 5}}},  // x- -> x+
    {{{0, 1, 5, 4}, {3, 2, 6, 7}}},  // y- -> y+
    {{{0, 1, 2, 3}, {4, 5, 6, 7}}},  // z- -> z+
}};

// Edge lengths below this are treated as collapsed.
inline constexpr double kDegenerateEdge = 1e-30;

struct SampleFrame {
  std::array<Vec3, 3> edges;
};

SampleFrame sample_frame(const HexCorners& x, int sample);

double jacobian(const SampleFrame& frame);

struct ScaledJacobian {
  double value = 0.0;
  bool degenerate = false;
};

// Column-normalized determinant; 0 and flagged degenerate when an edge is
// shorter than kDegenerateEdge.
ScaledJacobian scaled_jacobian(const SampleFrame& frame);

struct HexQuality {
  std::array<double, kSampleCount> jacobians{};
  std::array<double, kSampleCount> scaled{};
  std::array<bool, kSampleCount> degenerate{};
  double jacobian = 0.0;         // min over samples
  double scaled_jacobian = 0.0;  // min over samples
  int jacobian_argmin = 0;       // lowest index among ties
  int scaled_argmin = 0;
  double mean_edge_length = 0.0;  // mean of the 12 edges
};

HexQuality hex_quality(const HexCorners& x);

double resj(const HexQuality& hq, double theta);
double rehj(const HexQuality& hq, double theta);

enum class RehqjBranch { NegativeJacobian, ScaledJacobian, Clamped };

RehqjBranch rehqj_branch(const HexQuality& hq, double theta);
double rehqj(const HexQuality& hq, double theta);

// How the element energy and its gradient treat the nine samples.
//  ArgminOnly: ReHQJ of the hex minimum; the gradient is routed through the
//              single minimizing sample (lowest index on ties).
//  AllSamples: the mean of ReHQJ evaluated at each sample separately, a
//              smooth-in-the-min alternative; off by default.
enum class SampleMode { ArgminOnly, AllSamples };

double element_energy(const HexQuality& hq, double theta, SampleMode mode = SampleMode::ArgminOnly);

// d element_energy / d x_v for the 8 vertices, with the mean edge length
// held constant.
std::array<Vec3, 8> element_gradient(const HexCorners& x, const HexQuality& hq, double theta,
                                     SampleMode mode = SampleMode::ArgminOnly);

inline std::array<Vec3, 8> rehqj_gradient(const HexCorners& x, double theta) {
  return element_gradient(x, hex_quality(x), theta, SampleMode::ArgminOnly);
}

// Gradients of the per-sample Jacobian and scaled Jacobian w.r.t. the 8 vertices.
std::array<Vec3, 8> jacobian_gradient(const HexCorners& x, int sample);
std::array<Vec3, 8> scaled_jacobian_gradient(const HexCorners& x, int sample);

double mesh_energy(const HexMesh& mesh, double theta, SampleMode mode = SampleMode::ArgminOnly);
double mesh_resj_sum(const HexMesh& mesh, double theta);
double mesh_min_scaled_jacobian(const HexMesh& mesh);
double mesh_min_scaled_jacobian(std::span<const Vec3> vertices, std::span<const Hex> hexes);

// True when sum ReSJ(h, theta) = N_h theta, tested with tolerance 1e-12 N_h.
bool resj_target_met(const HexMesh& mesh, double theta);

inline constexpr int kHistogramBins = 20;

// Absolute distance below which a vertex counts as lying on the surface.
inline constexpr double kOnSurfaceTolerance = 1e-12;

struct QualityReport {
  double min_scaled_jacobian = 0.0;
  double max_scaled_jacobian = 0.0;
  std::array<std::size_t, kHistogramBins> histogram{};  // uniform over [-1, 1]
  std::size_t inverted = 0;                             // hexes with J(h) <= 0
  double max_dist = 0.0;  // max off-surface boundary distance / bbox diagonal
};

std::size_t histogram_bin(double scaled_jacobian);

QualityReport quality_report(const HexMesh& mesh, const TriSurface& surface, const SurfaceBinding& binding);

}  // namespace hexopt
