#include "hexopt/mesh.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "hexopt/error.hpp"
#include "hexopt/projection.hpp"

namespace hexopt {

namespace {

std::pair<Index, Index> edge_key(Index a, Index b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

std::string describe(const std::pair<Index, Index>& e) {
  std::ostringstream os;
  os << "(" << e.first << ", " << e.second << ")";
  return os.str();
}

}  // namespace

Aabb TriSurface::bounds() const {
  Aabb box;
  for (const auto& v : vertices) box.expand(v);
  return box;
}

std::vector<Vec3> TriSurface::curve_points(std::size_t curve) const {
  std::vector<Vec3> pts;
  pts.reserve(sharp_curves.at(curve).size());
  for (Index v : sharp_curves[curve]) pts.push_back(vertices.at(v));
  return pts;
}

std::vector<Violation> validate_tri_surface(const TriSurface& surface) {
  std::vector<Violation> report;
  const auto n = static_cast<Index>(surface.vertices.size());
  auto in_range = [n](Index v) { return v < n; };

  std::map<std::pair<Index, Index>, int> edge_use;
  for (std::size_t t = 0; t < surface.triangles.size(); ++t) {
    const auto& tri = surface.triangles[t];
    if (!std::all_of(tri.begin(), tri.end(), in_range)) {
      report.push_back({Violation::Kind::IndexOutOfRange,
                        "triangle " + std::to_string(t) + " references a vertex out of range"});
      continue;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      report.push_back({Violation::Kind::DegenerateTriangle,
                        "triangle " + std::to_string(t) + " repeats a vertex index"});
    } else {
      const Vec3& a = surface.vertices[tri[0]];
      const Vec3& b = surface.vertices[tri[1]];
      const Vec3& c = surface.vertices[tri[2]];
      if (squared_norm(cross(b - a, c - a)) == 0.0) {
        report.push_back({Violation::Kind::DegenerateTriangle,
                          "triangle " + std::to_string(t) + " has zero area"});
      }
    }
    for (int i = 0; i < 3; ++i) {
      if (tri[i] != tri[(i + 1) % 3]) ++edge_use[edge_key(tri[i], tri[(i + 1) % 3])];
    }
  }
  for (const auto& [edge, uses] : edge_use) {
    if (uses != 2) {
      report.push_back({Violation::Kind::EdgeNotShared,
                        "edge " + describe(edge) + " is used by " + std::to_string(uses) + " triangle(s)"});
    }
  }

  for (Index c : surface.sharp_corners) {
    if (!in_range(c)) {
      report.push_back({Violation::Kind::IndexOutOfRange, "sharp corner " + std::to_string(c) + " out of range"});
    }
  }
  for (std::size_t k = 0; k < surface.sharp_curves.size(); ++k) {
    const auto& chain = surface.sharp_curves[k];
    if (chain.size() < 2) {
      report.push_back({Violation::Kind::EmptyCurve, "sharp curve " + std::to_string(k) + " has no segment"});
      continue;
    }
    if (!std::all_of(chain.begin(), chain.end(), in_range)) {
      report.push_back({Violation::Kind::IndexOutOfRange,
                        "sharp curve " + std::to_string(k) + " references a vertex out of range"});
      continue;
    }
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      const auto e = edge_key(chain[i], chain[i + 1]);
      if (!edge_use.contains(e)) {
        report.push_back({Violation::Kind::CurveNotOnEdges,
                          "sharp curve " + std::to_string(k) + " step " + describe(e) + " is not a triangle edge"});
      }
    }
  }
  return report;
}

void HexMesh::validate() const {
  if (vertices.empty() || hexes.empty()) throw MeshError("hex mesh has no vertices or no elements");
  for (std::size_t h = 0; h < hexes.size(); ++h) {
    auto ids = hexes[h];
    for (Index v : ids) {
      if (v >= vertices.size()) {
        throw MeshError("hex " + std::to_string(h) + " references vertex " + std::to_string(v) + " out of range");
      }
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw MeshError("hex " + std::to_string(h) + " repeats a vertex index");
    }
  }
}

std::array<Vec3, 8> HexMesh::corners(std::size_t h) const {
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) out[i] = vertices[hexes[h][i]];
  return out;
}

bool BoundarySurface::is_boundary(Index v) const {
  return std::binary_search(boundary_vertices.begin(), boundary_vertices.end(), v);
}

BoundarySurface extract_boundary(const HexMesh& mesh) {
  struct FaceUse {
    int count = 0;
    Quad oriented{};
  };
  std::map<Quad, FaceUse> faces;
  for (const auto& hex : mesh.hexes) {
    for (const auto& f : kHexFaces) {
      Quad q{hex[f[0]], hex[f[1]], hex[f[2]], hex[f[3]]};
      Quad key = q;
      std::sort(key.begin(), key.end());
      auto& use = faces[key];
      if (++use.count > 2) {
        throw MeshError("non-manifold hex connectivity: face (" + std::to_string(key[0]) + ", " +
                        std::to_string(key[1]) + ", " + std::to_string(key[2]) + ", " + std::to_string(key[3]) +
                        ") is shared by more than two hexes");
      }
      use.oriented = q;
    }
  }

  BoundarySurface out;
  out.vertex_quads.resize(mesh.vertices.size());
  std::set<Index> verts;
  for (const auto& [key, use] : faces) {
    if (use.count != 1) continue;
    const auto id = static_cast<Index>(out.quads.size());
    out.quads.push_back(use.oriented);
    for (Index v : use.oriented) {
      verts.insert(v);
      out.vertex_quads[v].push_back(id);
    }
  }
  out.boundary_vertices.assign(verts.begin(), verts.end());
  return out;
}

MeshTopology build_topology(const HexMesh& mesh) {
  MeshTopology topo;
  topo.neighbors.resize(mesh.vertices.size());
  topo.vertex_hexes.resize(mesh.vertices.size());
  for (std::size_t h = 0; h < mesh.hexes.size(); ++h) {
    const auto& hex = mesh.hexes[h];
    for (Index v : hex) topo.vertex_hexes[v].push_back(static_cast<Index>(h));
    for (const auto& e : kHexEdges) {
      topo.neighbors[hex[e[0]]].push_back(hex[e[1]]);
      topo.neighbors[hex[e[1]]].push_back(hex[e[0]]);
    }
  }
  for (auto& n : topo.neighbors) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return topo;
}

void annotate_features(TriSurface& surface, const FeatureBindings& bindings) {
  surface.sharp_corners.clear();
  surface.sharp_curves.clear();
  for (const auto& c : bindings.corners) surface.sharp_corners.push_back(c.surface_vertex);
  for (const auto& c : bindings.curves) surface.sharp_curves.push_back(c.chain);
}

std::size_t SurfaceBinding::count(FeatureKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [kind](const BoundaryVertex& e) { return e.kind == kind; }));
}

SurfaceBinding classify_boundary_vertices(const HexMesh& mesh, const BoundarySurface& boundary,
                                          const TriSurface& surface, const FeatureBindings& bindings) {
  SurfaceBinding out;
  out.slot.assign(mesh.vertices.size(), -1);
  out.entries.reserve(boundary.boundary_vertices.size());
  for (Index v : boundary.boundary_vertices) {
    out.slot[v] = static_cast<std::int64_t>(out.entries.size());
    BoundaryVertex e;
    e.vertex = v;
    out.entries.push_back(e);
  }

  auto entry_for = [&](Index hex_vertex, const std::string& what) -> BoundaryVertex& {
    if (hex_vertex >= mesh.vertices.size() || out.slot[hex_vertex] < 0) {
      throw MeshError(what + " is bound to hex vertex " + std::to_string(hex_vertex) +
                      ", which is not a boundary vertex");
    }
    return out.entries[static_cast<std::size_t>(out.slot[hex_vertex])];
  };

  std::vector<bool> corner_bound(surface.sharp_corners.size(), false);
  for (const auto& cb : bindings.corners) {
    const auto it = std::find(surface.sharp_corners.begin(), surface.sharp_corners.end(), cb.surface_vertex);
    if (it == surface.sharp_corners.end()) {
      throw MeshError("surface vertex " + std::to_string(cb.surface_vertex) + " is not a sharp corner");
    }
    const auto ci = static_cast<std::size_t>(it - surface.sharp_corners.begin());
    if (corner_bound[ci]) {
      throw MeshError("sharp corner " + std::to_string(cb.surface_vertex) + " is bound more than once");
    }
    corner_bound[ci] = true;
    auto& e = entry_for(cb.hex_vertex, "sharp corner " + std::to_string(cb.surface_vertex));
    if (e.kind == FeatureKind::Corner) {
      throw MeshError("hex vertex " + std::to_string(cb.hex_vertex) + " is bound to two sharp corners");
    }
    e.kind = FeatureKind::Corner;
    e.corner = static_cast<Index>(ci);
  }
  for (std::size_t ci = 0; ci < corner_bound.size(); ++ci) {
    if (!corner_bound[ci]) {
      throw MeshError("sharp corner " + std::to_string(surface.sharp_corners[ci]) + " has no bound hex vertex");
    }
  }

  for (std::size_t k = 0; k < surface.sharp_curves.size(); ++k) {
    const auto it = std::find_if(bindings.curves.begin(), bindings.curves.end(),
                                 [&](const CurveBinding& cb) { return cb.chain == surface.sharp_curves[k]; });
    if (it == bindings.curves.end() || it->hex_vertices.empty()) {
      throw MeshError("sharp curve " + std::to_string(k) + " has no bound hex vertices");
    }
    for (Index v : it->hex_vertices) {
      auto& e = entry_for(v, "sharp curve " + std::to_string(k));
      if (e.kind == FeatureKind::Corner) continue;  // corners dominate curve membership
      e.kind = FeatureKind::SharpEdge;
      if (std::find(e.curves.begin(), e.curves.end(), k) == e.curves.end()) e.curves.push_back(static_cast<Index>(k));
    }
  }

  const TriangleBVH bvh(surface);
  compute_targets(out, mesh.vertices, surface, bvh);
  return out;
}

}  // namespace hexopt
