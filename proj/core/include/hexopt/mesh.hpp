#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hexopt/vec3.hpp"

namespace hexopt {

using Index = std::uint32_t;
using Triangle = std::array<Index, 3>;
using Quad = std::array<Index, 4>;

// Hex corner ordering (VTK_HEXAHEDRON):
//
//        7-----------6
//       /|          /|
//      / |         / |
//     4-----------5  |
//     |  |        |  |        z
//     |  3--------|--2        |  y
//     | /         | /         | /
//     |/          |/          |/
//     0-----------1           +----x
//
// Bottom quad 0-1-2-3 is counterclockwise seen from +z, top quad 4-5-6-7
// sits above it. A right-handed unit cube has positive Jacobian at all
// eight corners and at the body center.
using Hex = std::array<Index, 8>;

// The six faces of a hex, each ordered so that its normal points outward.
inline constexpr std::array<std::array<int, 4>, 6> kHexFaces = {{
    {0, 3, 2, 1},  // z-
    {4, 5, 6, 7},  // z+
    {0, 1, 5, 4},  // y-
    {2, 3, 7, 6},  // y+
    {0, 4, 7, 3},  // x-
    {1, 2, 6, 5},  // x+
}};

inline constexpr std::array<std::array<int, 2>, 12> kHexEdges = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0},
    {4, 5}, {5, 6}, {6, 7}, {7, 4},
    {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

// Closed triangle surface, optionally annotated with sharp features.
struct TriSurface {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Index> sharp_corners;
  std::vector<std::vector<Index>> sharp_curves;  // ordered vertex chains

  Aabb bounds() const;
  double diagonal() const { return bounds().diagonal(); }
  std::vector<Vec3> curve_points(std::size_t curve) const;
};

struct Violation {
  enum class Kind {
    EdgeNotShared,     // undirected edge used by a number of triangles other than two
    IndexOutOfRange,
    DegenerateTriangle,
    CurveNotOnEdges,   // consecutive chain vertices that are not a triangle edge
    EmptyCurve,
  };
  Kind kind;
  std::string message;
};

// Empty result iff the surface is watertight, index-valid, free of
// zero-area triangles, and its curves run along triangle edges.
std::vector<Violation> validate_tri_surface(const TriSurface& surface);

struct HexMesh {
  std::vector<Vec3> vertices;
  std::vector<Hex> hexes;

  // Throws MeshError on empty meshes, out-of-range or repeated indices.
  void validate() const;

  std::array<Vec3, 8> corners(std::size_t h) const;
};

struct BoundarySurface {
  std::vector<Quad> quads;             // outward-oriented, sorted by vertex key
  std::vector<Index> boundary_vertices;  // sorted
  std::vector<std::vector<Index>> vertex_quads;  // incident boundary quads, per mesh vertex

  bool is_boundary(Index v) const;
};

// Throws MeshError when a face is shared by more than two hexes.
BoundarySurface extract_boundary(const HexMesh& mesh);

// Vertex-to-vertex (hex edges) and vertex-to-hex incidence.
struct MeshTopology {
  std::vector<std::vector<Index>> neighbors;
  std::vector<std::vector<Index>> vertex_hexes;
};

MeshTopology build_topology(const HexMesh& mesh);

// Explicit correspondence between sharp features of the triangle surface
// and hex boundary vertices.
struct CornerBinding {
  Index surface_vertex;
  Index hex_vertex;
};

struct CurveBinding {
  std::vector<Index> chain;        // surface vertex chain
  std::vector<Index> hex_vertices;  // boundary vertices confined to this curve
};

struct FeatureBindings {
  std::vector<CornerBinding> corners;
  std::vector<CurveBinding> curves;
};

// Copies the feature geometry named by the bindings onto the surface:
// sharp_corners[i] = corners[i].surface_vertex, sharp_curves[i] = curves[i].chain.
void annotate_features(TriSurface& surface, const FeatureBindings& bindings);

enum class FeatureKind { Corner, SharpEdge, Face };

struct BoundaryVertex {
  Index vertex = 0;
  FeatureKind kind = FeatureKind::Face;
  Index corner = 0;            // index into TriSurface::sharp_corners (Corner)
  std::vector<Index> curves;   // indices into TriSurface::sharp_curves (SharpEdge)
  Vec3 target;
};

struct SurfaceBinding {
  std::vector<BoundaryVertex> entries;  // one per boundary vertex, sorted by vertex
  std::vector<std::int64_t> slot;       // mesh vertex -> entry index, -1 for interior

  std::size_t size() const { return entries.size(); }
  bool is_boundary(Index v) const { return v < slot.size() && slot[v] >= 0; }
  std::size_t count(FeatureKind kind) const;
};

// Assigns a feature class to every boundary vertex and initializes targets
// with one projection pass. Throws MeshError on a missing corner binding,
// a vertex bound to two corners, a curve with no bound vertices, or a
// binding that names an interior vertex.
SurfaceBinding classify_boundary_vertices(const HexMesh& mesh, const BoundarySurface& boundary,
                                          const TriSurface& surface, const FeatureBindings& bindings);

}  // namespace hexopt
