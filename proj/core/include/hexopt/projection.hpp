#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hexopt/mesh.hpp"
#include "hexopt/vec3.hpp"

namespace hexopt {

struct ClosestPoint {
  Vec3 point;
  double distance_squared = 0.0;
};

// Exact closest point on triangle abc. A degenerate (zero-area) triangle is
// treated as its longest edge.
ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

ClosestPoint closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b);

struct CurvePoint {
  Vec3 point;
  double distance_squared = 0.0;
  std::size_t segment = 0;
};

// Closest point on a polyline with at least two points. Ties go to the
// lowest segment index.
CurvePoint closest_point_on_curve(const Vec3& p, std::span<const Vec3> polyline);

struct SurfaceHit {
  Vec3 point;
  double distance_squared = 0.0;
  Index triangle = 0;
};

// Axis-aligned bounding volume hierarchy over the triangles of a surface.
// Queries return the global minimizer; among equidistant triangles the
// lowest index wins, so results match closest_point_brute_force exactly.
class TriangleBVH {
 public:
  static constexpr std::size_t kLeafSize = 4;

  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: offset into order(); inner: left child
    std::uint32_t count = 0;  // leaf: triangle count; inner: 0
    std::uint32_t right = 0;  // inner: right child
    bool leaf() const { return count > 0; }
  };

  TriangleBVH() = default;
  explicit TriangleBVH(const TriSurface& surface);

  SurfaceHit closest(const Vec3& p) const;

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Index> order() const { return order_; }

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

  std::vector<std::array<Vec3, 3>> triangles_;
  std::vector<Node> nodes_;
  std::vector<Index> order_;
};

SurfaceHit closest_point_brute_force(const TriSurface& surface, const Vec3& p);

// Target point of a single boundary vertex located at p, per its feature class.
Vec3 feature_target(const BoundaryVertex& entry, const Vec3& p, const TriSurface& surface,
                    const TriangleBVH& bvh);

// Recomputes x_t for every boundary vertex from the current positions.
void compute_targets(SurfaceBinding& binding, std::span<const Vec3> positions, const TriSurface& surface,
                     const TriangleBVH& bvh);

// max_i |x_i - x_i^t| / diagonal(bbox(surface)).
double max_relative_distance(const SurfaceBinding& binding, std::span<const Vec3> positions,
                             const TriSurface& surface);

double max_residual(const SurfaceBinding& binding, std::span<const Vec3> positions);

}  // namespace hexopt
