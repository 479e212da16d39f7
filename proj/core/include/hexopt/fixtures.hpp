#pragma once

#include <cstdint>
#include <string>

#include "hexopt/mesh.hpp"

namespace hexopt {

// A triangle surface with its feature annotation, a hex mesh fitted to it,
// and the explicit feature correspondence between the two.
struct Fixture {
  TriSurface surface;
  HexMesh mesh;
  FeatureBindings features;
};

// Structured a x b x c grid of hexes spanning [lo, hi].
HexMesh grid_mesh(int a, int b, int c, const Vec3& lo = {0, 0, 0}, const Vec3& hi = {1, 1, 1});

// Closed unit cube surface with 8 corners and 12 straight sharp curves,
// and an n^3 grid whose corner and edge vertices are bound to them.
Fixture cube_grid_fixture(int n);

// Icosphere of radius 1 (`subdivisions` levels of 4-to-1 refinement).
TriSurface icosphere(int subdivisions);

// n^3 grid on [-1, 1]^3 mapped radially so that every cube shell becomes a
// sphere; the outer shell lands on the unit sphere. No sharp features.
Fixture sphere_fixture(int n, int subdivisions = 3);

// L-shaped prism ([0,2]^2 minus [1,2]^2, extruded over [0,1]) meshed with
// n hexes per unit length. All 12 prism corners and 18 prism edges are
// sharp, including the concave vertical edge at (1, 1).
Fixture l_bracket_fixture(int n);

// Displaces every interior vertex by a uniform random vector in the ball of
// radius magnitude * (mean incident edge length). Boundary vertices are not
// touched. Deterministic for a given seed.
HexMesh perturb_interior(const HexMesh& mesh, double magnitude, std::uint64_t seed);

}  // namespace hexopt
