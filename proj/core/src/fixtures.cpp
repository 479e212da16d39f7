#include "hexopt/fixtures.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <random>

#include "hexopt/error.hpp"

namespace hexopt {

namespace {

using GridCoord = std::array<int, 3>;

// Hex grid over integer lattice points, restricted to the cells accepted by
// `keep`. Vertex (i, j, k) sits at origin + h * (i, j, k).
struct LatticeMesh {
  HexMesh mesh;
  std::map<GridCoord, Index> ids;

  Index at(const GridCoord& c) const { return ids.at(c); }
};

LatticeMesh lattice_mesh(int nx, int ny, int nz, const Vec3& origin, const Vec3& h,
                         const std::function<bool(int, int, int)>& keep) {
  LatticeMesh out;
  auto vertex = [&](int i, int j, int k) {
    const GridCoord c{i, j, k};
    const auto it = out.ids.find(c);
    if (it != out.ids.end()) return it->second;
    return out.ids.emplace(c, static_cast<Index>(out.ids.size())).first->second;
  };
  // Number vertices in lexicographic (k, j, i) order first so ids are stable.
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        bool used = false;
        for (int dk = -1; dk <= 0 && !used; ++dk) {
          for (int dj = -1; dj <= 0 && !used; ++dj) {
            for (int di = -1; di <= 0 && !used; ++di) {
              const int ci = i + di;
              const int cj = j + dj;
              const int ck = k + dk;
              used = ci >= 0 && cj >= 0 && ck >= 0 && ci < nx && cj < ny && ck < nz && keep(ci, cj, ck);
            }
          }
        }
        if (used) vertex(i, j, k);
      }
    }
  }
  out.mesh.vertices.resize(out.ids.size());
  for (const auto& [c, id] : out.ids) {
    out.mesh.vertices[id] = {origin.x + h.x * c[0], origin.y + h.y * c[1], origin.z + h.z * c[2]};
  }
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (!keep(i, j, k)) continue;
        out.mesh.hexes.push_back({out.at({i, j, k}), out.at({i + 1, j, k}), out.at({i + 1, j + 1, k}),
                                  out.at({i, j + 1, k}), out.at({i, j, k + 1}), out.at({i + 1, j, k + 1}),
                                  out.at({i + 1, j + 1, k + 1}), out.at({i, j + 1, k + 1})});
      }
    }
  }
  return out;
}

// Binds surface corners (given as lattice coordinates) to the coincident
// hex vertices, and each straight axis-aligned sharp edge to the hex
// vertices strictly between its end points.
FeatureBindings lattice_features(const LatticeMesh& lattice, const std::vector<GridCoord>& corner_coords,
                                 const std::vector<std::array<Index, 2>>& edges) {
  FeatureBindings f;
  for (std::size_t c = 0; c < corner_coords.size(); ++c) {
    f.corners.push_back({static_cast<Index>(c), lattice.at(corner_coords[c])});
  }
  for (const auto& e : edges) {
    const auto& a = corner_coords[e[0]];
    const auto& b = corner_coords[e[1]];
    GridCoord step{};
    int length = 0;
    for (int d = 0; d < 3; ++d) {
      step[d] = (b[d] > a[d]) - (b[d] < a[d]);
      length = std::max(length, std::abs(b[d] - a[d]));
    }
    CurveBinding curve;
    curve.chain = {e[0], e[1]};
    for (int t = 1; t < length; ++t) {
      curve.hex_vertices.push_back(lattice.at({a[0] + t * step[0], a[1] + t * step[1], a[2] + t * step[2]}));
    }
    f.curves.push_back(std::move(curve));
  }
  return f;
}

}  // namespace

HexMesh grid_mesh(int a, int b, int c, const Vec3& lo, const Vec3& hi) {
  if (a < 1 || b < 1 || c < 1) throw MeshError("grid dimensions must be positive");
  const Vec3 h{(hi.x - lo.x) / a, (hi.y - lo.y) / b, (hi.z - lo.z) / c};
  return lattice_mesh(a, b, c, lo, h, [](int, int, int) { return true; }).mesh;
}

Fixture cube_grid_fixture(int n) {
  if (n < 1) throw MeshError("cube-grid resolution must be positive");
  const double h = 1.0 / n;
  const auto lattice = lattice_mesh(n, n, n, {0, 0, 0}, {h, h, h}, [](int, int, int) { return true; });

  Fixture fx;
  fx.mesh = lattice.mesh;
  // Surface vertices follow the hex corner ordering of a single unit cube.
  const std::vector<GridCoord> corners = {{0, 0, 0}, {n, 0, 0}, {n, n, 0}, {0, n, 0},
                                          {0, 0, n}, {n, 0, n}, {n, n, n}, {0, n, n}};
  for (const auto& c : corners) fx.surface.vertices.push_back({c[0] * h, c[1] * h, c[2] * h});
  for (const auto& f : kHexFaces) {
    fx.surface.triangles.push_back({Index(f[0]), Index(f[1]), Index(f[2])});
    fx.surface.triangles.push_back({Index(f[0]), Index(f[2]), Index(f[3])});
  }
  std::vector<std::array<Index, 2>> edges;
  for (const auto& e : kHexEdges) edges.push_back({Index(e[0]), Index(e[1])});
  fx.features = lattice_features(lattice, corners, edges);
  annotate_features(fx.surface, fx.features);
  return fx;
}

TriSurface icosphere(int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriSurface s;
  s.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : s.vertices) v = v / norm(v);
  s.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<Index, Index>, Index> midpoint;
    auto mid = [&](Index a, Index b) {
      const auto key = a < b ? std::pair{a, b} : std::pair{b, a};
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const Vec3 m = (s.vertices[a] + s.vertices[b]) * 0.5;
      s.vertices.push_back(m / norm(m));
      const auto id = static_cast<Index>(s.vertices.size() - 1);
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Triangle> next;
    next.reserve(4 * s.triangles.size());
    for (const auto& tri : s.triangles) {
      const Index ab = mid(tri[0], tri[1]);
      const Index bc = mid(tri[1], tri[2]);
      const Index ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    s.triangles = std::move(next);
  }
  return s;
}

Fixture sphere_fixture(int n, int subdivisions) {
  if (n < 1) throw MeshError("sphere resolution must be positive");
  Fixture fx;
  fx.mesh = grid_mesh(n, n, n, {-1, -1, -1}, {1, 1, 1});
  for (auto& v : fx.mesh.vertices) {
    const double inf = std::max({std::abs(v.x), std::abs(v.y), std::abs(v.z)});
    const double two = norm(v);
    if (two > 0.0) v = v * (inf / two);
  }
  fx.surface = icosphere(subdivisions);
  return fx;
}

Fixture l_bracket_fixture(int n) {
  if (n < 1) throw MeshError("l-bracket resolution must be positive");
  const double h = 1.0 / n;
  const auto lattice = lattice_mesh(2 * n, 2 * n, n, {0, 0, 0}, {h, h, h},
                                    [n](int i, int j, int) { return i < n || j < n; });
  Fixture fx;
  fx.mesh = lattice.mesh;

  // L outline, counterclockwise seen from +z; bottom ring then top ring.
  const std::array<std::array<int, 2>, 6> outline = {{{0, 0}, {2 * n, 0}, {2 * n, n}, {n, n}, {n, 2 * n}, {0, 2 * n}}};
  std::vector<GridCoord> corners;
  for (int k : {0, n}) {
    for (const auto& p : outline) corners.push_back({p[0], p[1], k});
  }
  for (const auto& c : corners) fx.surface.vertices.push_back({c[0] * h, c[1] * h, c[2] * h});

  auto& tris = fx.surface.triangles;
  const std::array<std::array<Index, 3>, 4> cap = {{{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}}};
  for (const auto& t : cap) {
    tris.push_back({t[0], t[2], t[1]});              // bottom faces -z
    tris.push_back({t[0] + 6, t[1] + 6, t[2] + 6});  // top faces +z
  }
  std::vector<std::array<Index, 2>> edges;
  for (Index i = 0; i < 6; ++i) {
    const Index j = (i + 1) % 6;
    tris.push_back({i, j, j + 6});
    tris.push_back({i, j + 6, i + 6});
    edges.push_back({i, j});
    edges.push_back({i + 6, j + 6});
  }
  for (Index i = 0; i < 6; ++i) edges.push_back({i, i + 6});
  fx.features = lattice_features(lattice, corners, edges);
  annotate_features(fx.surface, fx.features);
  return fx;
}

HexMesh perturb_interior(const HexMesh& mesh, double magnitude, std::uint64_t seed) {
  HexMesh out = mesh;
  if (magnitude == 0.0) return out;
  const auto boundary = extract_boundary(mesh);
  const auto topology = build_topology(mesh);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (boundary.is_boundary(static_cast<Index>(v)) || topology.neighbors[v].empty()) continue;
    double sum = 0.0;
    for (Index n : topology.neighbors[v]) sum += norm(mesh.vertices[n] - mesh.vertices[v]);
    const double radius = magnitude * sum / static_cast<double>(topology.neighbors[v].size());
    Vec3 u;
    do {
      u = {unit(rng), unit(rng), unit(rng)};
    } while (squared_norm(u) > 1.0);
    out.vertices[v] += u * radius;
  }
  return out;
}

}  // namespace hexopt
