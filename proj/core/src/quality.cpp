#include "hexopt/quality.hpp"

#include <algorithm>

#include "hexopt/projection.hpp"

namespace hexopt {

namespace {

Vec3 face_center(const HexCorners& x, const std::array<int, 4>& f) {
  return (x[f[0]] + x[f[1]] + x[f[2]] + x[f[3]]) * 0.25;
}

// d det / d e_i for the three columns.
std::array<Vec3, 3> determinant_cofactors(const SampleFrame& f) {
  const auto& e = f.edges;
  return {cross(e[1], e[2]), cross(e[2], e[0]), cross(e[0], e[1])};
}

// Pulls per-edge-vector derivatives back onto the 8 hex vertices.
std::array<Vec3, 8> scatter(int sample, const std::array<Vec3, 3>& edge_grad) {
  std::array<Vec3, 8> g{};
  if (sample == kBodyCenter) {
    for (int i = 0; i < 3; ++i) {
      const Vec3 q = edge_grad[i] * 0.25;
      for (int v : kCenterFaces[i][1]) g[v] += q;
      for (int v : kCenterFaces[i][0]) g[v] -= q;
    }
    return g;
  }
  const auto& row = kCornerTable[sample];
  for (int i = 0; i < 3; ++i) {
    g[row[i + 1]] += edge_grad[i];
    g[row[0]] -= edge_grad[i];
  }
  return g;
}

double sample_rehqj(double j, double sj, double ebar, double theta) {
  if (j <= 0.0) return j / ebar;
  if (sj <= theta) return sj * ebar * ebar;
  return theta;
}

}  // namespace

SampleFrame sample_frame(const HexCorners& x, int sample) {
  SampleFrame f;
  if (sample == kBodyCenter) {
    for (int i = 0; i < 3; ++i) f.edges[i] = face_center(x, kCenterFaces[i][1]) - face_center(x, kCenterFaces[i][0]);
    return f;
  }
  const auto& row = kCornerTable[sample];
  for (int i = 0; i < 3; ++i) f.edges[i] = x[row[i + 1]] - x[row[0]];
  return f;
}

double jacobian(const SampleFrame& frame) { return det3(frame.edges[0], frame.edges[1], frame.edges[2]); }

ScaledJacobian scaled_jacobian(const SampleFrame& frame) {
  const double l0 = norm(frame.edges[0]);
  const double l1 = norm(frame.edges[1]);
  const double l2 = norm(frame.edges[2]);
  if (l0 < kDegenerateEdge || l1 < kDegenerateEdge || l2 < kDegenerateEdge) return {0.0, true};
  const double sj = det3(frame.edges[0] / l0, frame.edges[1] / l1, frame.edges[2] / l2);
  return {std::clamp(sj, -1.0, 1.0), false};
}

HexQuality hex_quality(const HexCorners& x) {
  HexQuality hq;
  for (int s = 0; s < kSampleCount; ++s) {
    const auto frame = sample_frame(x, s);
    hq.jacobians[s] = jacobian(frame);
    const auto sj = scaled_jacobian(frame);
    hq.scaled[s] = sj.value;
    hq.degenerate[s] = sj.degenerate;
  }
  hq.jacobian_argmin = static_cast<int>(std::min_element(hq.jacobians.begin(), hq.jacobians.end()) - hq.jacobians.begin());
  hq.scaled_argmin = static_cast<int>(std::min_element(hq.scaled.begin(), hq.scaled.end()) - hq.scaled.begin());
  hq.jacobian = hq.jacobians[hq.jacobian_argmin];
  hq.scaled_jacobian = hq.scaled[hq.scaled_argmin];
  double sum = 0.0;
  for (const auto& e : kHexEdges) sum += norm(x[e[1]] - x[e[0]]);
  hq.mean_edge_length = sum / 12.0;
  return hq;
}

double resj(const HexQuality& hq, double theta) { return hq.scaled_jacobian <= theta ? hq.scaled_jacobian : theta; }

double rehj(const HexQuality& hq, double theta) {
  if (hq.jacobian <= 0.0) return hq.jacobian;
  return hq.scaled_jacobian <= theta ? hq.scaled_jacobian : theta;
}

RehqjBranch rehqj_branch(const HexQuality& hq, double theta) {
  if (hq.jacobian <= 0.0) return RehqjBranch::NegativeJacobian;
  if (hq.scaled_jacobian <= theta) return RehqjBranch::ScaledJacobian;
  return RehqjBranch::Clamped;
}

double rehqj(const HexQuality& hq, double theta) {
  const double e = hq.mean_edge_length;
  switch (rehqj_branch(hq, theta)) {
    case RehqjBranch::NegativeJacobian:
      return hq.jacobian / e;
    case RehqjBranch::ScaledJacobian:
      return hq.scaled_jacobian * e * e;
    case RehqjBranch::Clamped:
      break;
  }
  return theta;
}

double element_energy(const HexQuality& hq, double theta, SampleMode mode) {
  if (mode == SampleMode::ArgminOnly) return rehqj(hq, theta);
  double sum = 0.0;
  for (int s = 0; s < kSampleCount; ++s) sum += sample_rehqj(hq.jacobians[s], hq.scaled[s], hq.mean_edge_length, theta);
  return sum / kSampleCount;
}

std::array<Vec3, 8> jacobian_gradient(const HexCorners& x, int sample) {
  return scatter(sample, determinant_cofactors(sample_frame(x, sample)));
}

std::array<Vec3, 8> scaled_jacobian_gradient(const HexCorners& x, int sample) {
  const auto frame = sample_frame(x, sample);
  const auto& e = frame.edges;
  const std::array<double, 3> len{norm(e[0]), norm(e[1]), norm(e[2])};
  if (len[0] < kDegenerateEdge || len[1] < kDegenerateEdge || len[2] < kDegenerateEdge) return {};
  const double product = len[0] * len[1] * len[2];
  const double sj = jacobian(frame) / product;
  const auto cof = determinant_cofactors(frame);
  std::array<Vec3, 3> d;
  for (int i = 0; i < 3; ++i) d[i] = cof[i] / product - e[i] * (sj / (len[i] * len[i]));
  return scatter(sample, d);
}

std::array<Vec3, 8> element_gradient(const HexCorners& x, const HexQuality& hq, double theta, SampleMode mode) {
  const double ebar = hq.mean_edge_length;
  auto sample_gradient = [&](int s, double j, double sj, bool degenerate) -> std::array<Vec3, 8> {
    if (j <= 0.0) {
      auto g = jacobian_gradient(x, s);
      for (auto& v : g) v *= 1.0 / ebar;
      return g;
    }
    if (sj <= theta && !degenerate) {
      auto g = scaled_jacobian_gradient(x, s);
      for (auto& v : g) v *= ebar * ebar;
      return g;
    }
    return {};
  };

  if (mode == SampleMode::ArgminOnly) {
    switch (rehqj_branch(hq, theta)) {
      case RehqjBranch::NegativeJacobian:
        return sample_gradient(hq.jacobian_argmin, hq.jacobian, 0.0, false);
      case RehqjBranch::ScaledJacobian: {
        const int s = hq.scaled_argmin;
        return sample_gradient(s, 1.0, hq.scaled[s], hq.degenerate[s]);
      }
      case RehqjBranch::Clamped:
        break;
    }
    return {};
  }

  std::array<Vec3, 8> total{};
  for (int s = 0; s < kSampleCount; ++s) {
    const auto g = sample_gradient(s, hq.jacobians[s], hq.scaled[s], hq.degenerate[s]);
    for (int v = 0; v < 8; ++v) total[v] += g[v] * (1.0 / kSampleCount);
  }
  return total;
}

double mesh_energy(const HexMesh& mesh, double theta, SampleMode mode) {
  double sum = 0.0;
  for (std::size_t h = 0; h < mesh.hexes.size(); ++h) sum += element_energy(hex_quality(mesh.corners(h)), theta, mode);
  return sum;
}

double mesh_resj_sum(const HexMesh& mesh, double theta) {
  double sum = 0.0;
  for (std::size_t h = 0; h < mesh.hexes.size(); ++h) sum += resj(hex_quality(mesh.corners(h)), theta);
  return sum;
}

bool resj_target_met(const HexMesh& mesh, double theta) {
  const double n = static_cast<double>(mesh.hexes.size());
  return mesh_resj_sum(mesh, theta) >= n * theta - 1e-12 * n;
}

double mesh_min_scaled_jacobian(std::span<const Vec3> vertices, std::span<const Hex> hexes) {
  double m = 1.0;
  for (const auto& hex : hexes) {
    HexCorners x;
    for (int i = 0; i < 8; ++i) x[i] = vertices[hex[i]];
    m = std::min(m, hex_quality(x).scaled_jacobian);
  }
  return m;
}

double mesh_min_scaled_jacobian(const HexMesh& mesh) { return mesh_min_scaled_jacobian(mesh.vertices, mesh.hexes); }

std::size_t histogram_bin(double scaled_jacobian) {
  constexpr int last = kHistogramBins - 1;
  // Lower edge of bin k; one correctly rounded division, so edges equal
  // their decimal literals (-0.9, 0.9, ...).
  constexpr int half = kHistogramBins / 2;
  auto edge = [](int k) { return static_cast<double>(k - half) / half; };
  const double s = std::clamp(scaled_jacobian, -1.0, 1.0);
  int k = std::min(static_cast<int>((s + 1.0) / 2.0 * kHistogramBins), last);
  while (k < last && s >= edge(k + 1)) ++k;
  while (k > 0 && s < edge(k)) --k;
  return static_cast<std::size_t>(k);
}

QualityReport quality_report(const HexMesh& mesh, const TriSurface& surface, const SurfaceBinding& binding) {
  QualityReport r;
  r.min_scaled_jacobian = HUGE_VAL;
  r.max_scaled_jacobian = -HUGE_VAL;
  for (std::size_t h = 0; h < mesh.hexes.size(); ++h) {
    const auto hq = hex_quality(mesh.corners(h));
    r.min_scaled_jacobian = std::min(r.min_scaled_jacobian, hq.scaled_jacobian);
    r.max_scaled_jacobian = std::max(r.max_scaled_jacobian, hq.scaled_jacobian);
    ++r.histogram[histogram_bin(hq.scaled_jacobian)];
    if (hq.jacobian <= 0.0) ++r.inverted;
  }
  const TriangleBVH bvh(surface);
  double dist = 0.0;
  for (const auto& e : binding.entries) {
    const double d = std::sqrt(bvh.closest(mesh.vertices[e.vertex]).distance_squared);
    if (d > kOnSurfaceTolerance) dist = std::max(dist, d);
  }
  r.max_dist = dist / surface.diagonal();
  return r;
}

}  // namespace hexopt
