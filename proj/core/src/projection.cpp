#include "hexopt/projection.hpp"

#include <algorithm>
#include <numeric>

namespace hexopt {

ClosestPoint closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = squared_norm(ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec3 q = t == 1.0 ? b : a + t * ab;
  return {q, squared_norm(p - q)};
}

namespace {

ClosestPoint longest_edge(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const double ab = squared_norm(b - a);
  const double bc = squared_norm(c - b);
  const double ca = squared_norm(a - c);
  if (ab >= bc && ab >= ca) return closest_point_on_segment(p, a, b);
  if (bc >= ca) return closest_point_on_segment(p, b, c);
  return closest_point_on_segment(p, c, a);
}

ClosestPoint finish(const Vec3& p, const Vec3& q) { return {q, squared_norm(p - q)}; }

}  // namespace

// Voronoi-region walk (Ericson, Real-Time Collision Detection, 5.1.5).
ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const double scale = std::max({squared_norm(ab), squared_norm(ac), squared_norm(c - b)});
  if (squared_norm(cross(ab, ac)) <= 1e-28 * scale * scale) return longest_edge(p, a, b, c);

  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return finish(p, a);

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return finish(p, b);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return finish(p, a + (d1 / (d1 - d3)) * ab);

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return finish(p, c);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return finish(p, a + (d2 / (d2 - d6)) * ac);

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return finish(p, b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b));
  }

  const double denom = 1.0 / (va + vb + vc);
  return finish(p, a + (vb * denom) * ab + (vc * denom) * ac);
}

CurvePoint closest_point_on_curve(const Vec3& p, std::span<const Vec3> polyline) {
  CurvePoint best;
  best.distance_squared = HUGE_VAL;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const auto cp = closest_point_on_segment(p, polyline[i], polyline[i + 1]);
    if (cp.distance_squared < best.distance_squared) best = {cp.point, cp.distance_squared, i};
  }
  if (polyline.size() == 1) best = {polyline[0], squared_norm(p - polyline[0]), 0};
  return best;
}

namespace {

bool better(double d2, Index tri, const SurfaceHit& best) {
  return d2 < best.distance_squared || (d2 == best.distance_squared && tri < best.triangle);
}

}  // namespace

TriangleBVH::TriangleBVH(const TriSurface& surface) {
  const std::size_t n = surface.triangles.size();
  triangles_.reserve(n);
  std::vector<Vec3> centroids;
  centroids.reserve(n);
  for (const auto& t : surface.triangles) {
    triangles_.push_back({surface.vertices[t[0]], surface.vertices[t[1]], surface.vertices[t[2]]});
    centroids.push_back((surface.vertices[t[0]] + surface.vertices[t[1]] + surface.vertices[t[2]]) / 3.0);
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), Index{0});
  if (n > 0) {
    nodes_.reserve(2 * n / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(n), centroids);
  }
}

std::uint32_t TriangleBVH::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb cbox;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (const auto& v : triangles_[order_[i]]) box.expand(v);
    cbox.expand(centroids[order_[i]]);
  }
  nodes_[id].box = box;
  if (end - begin <= kLeafSize) {
    nodes_[id].first = begin;
    nodes_[id].count = end - begin;
    return id;
  }
  const Vec3 extent = cbox.hi - cbox.lo;
  int axis = 0;
  if (extent.y > extent[axis]) axis = 1;
  if (extent.z > extent[axis]) axis = 2;
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](Index l, Index r) {
    const double cl = centroids[l][axis];
    const double cr = centroids[r][axis];
    return cl < cr || (cl == cr && l < r);
  });
  const std::uint32_t left = build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[id].first = left;
  nodes_[id].right = right;
  return id;
}

SurfaceHit TriangleBVH::closest(const Vec3& p) const {
  SurfaceHit best;
  best.distance_squared = HUGE_VAL;
  if (nodes_.empty()) return best;

  // Boxes are pruned only when clearly farther than the current best, so
  // equidistant triangles are still visited and the index tie-break holds.
  auto prune = [&](double box_d2) { return box_d2 > best.distance_squared * (1.0 + 1e-9); };

  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (prune(node.box.squared_distance(p))) continue;
    if (node.leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const Index t = order_[i];
        const auto& tri = triangles_[t];
        const auto cp = closest_point_on_triangle(p, tri[0], tri[1], tri[2]);
        if (better(cp.distance_squared, t, best)) best = {cp.point, cp.distance_squared, t};
      }
      continue;
    }
    const double dl = nodes_[node.first].box.squared_distance(p);
    const double dr = nodes_[node.right].box.squared_distance(p);
    // Push the farther child first so the nearer one is searched first.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.first;
    } else {
      stack[top++] = node.first;
      stack[top++] = node.right;
    }
  }
  return best;
}

SurfaceHit closest_point_brute_force(const TriSurface& surface, const Vec3& p) {
  SurfaceHit best;
  best.distance_squared = HUGE_VAL;
  for (std::size_t t = 0; t < surface.triangles.size(); ++t) {
    const auto& tri = surface.triangles[t];
    const auto cp =
        closest_point_on_triangle(p, surface.vertices[tri[0]], surface.vertices[tri[1]], surface.vertices[tri[2]]);
    if (better(cp.distance_squared, static_cast<Index>(t), best)) {
      best = {cp.point, cp.distance_squared, static_cast<Index>(t)};
    }
  }
  return best;
}

Vec3 feature_target(const BoundaryVertex& entry, const Vec3& p, const TriSurface& surface, const TriangleBVH& bvh) {
  switch (entry.kind) {
    case FeatureKind::Corner:
      return surface.vertices[surface.sharp_corners[entry.corner]];
    case FeatureKind::SharpEdge: {
      Vec3 best_point = p;
      double best_d2 = HUGE_VAL;
      for (Index k : entry.curves) {
        const auto& chain = surface.sharp_curves[k];
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
          const auto cp = closest_point_on_segment(p, surface.vertices[chain[i]], surface.vertices[chain[i + 1]]);
          if (cp.distance_squared < best_d2) {
            best_d2 = cp.distance_squared;
            best_point = cp.point;
          }
        }
      }
      return best_point;
    }
    case FeatureKind::Face:
      break;
  }
  return bvh.closest(p).point;
}

void compute_targets(SurfaceBinding& binding, std::span<const Vec3> positions, const TriSurface& surface,
                     const TriangleBVH& bvh) {
  for (auto& e : binding.entries) e.target = feature_target(e, positions[e.vertex], surface, bvh);
}

double max_residual(const SurfaceBinding& binding, std::span<const Vec3> positions) {
  double r2 = 0.0;
  for (const auto& e : binding.entries) r2 = std::max(r2, squared_norm(positions[e.vertex] - e.target));
  return std::sqrt(r2);
}

double max_relative_distance(const SurfaceBinding& binding, std::span<const Vec3> positions,
                             const TriSurface& surface) {
  return max_residual(binding, positions) / surface.diagonal();
}

}  // namespace hexopt
