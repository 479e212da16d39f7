#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hexopt/fixtures.hpp"
#include "hexopt/quality.hpp"

using namespace hexopt;

namespace {

HexCorners box(double sx, double sy, double sz) {
  return {Vec3{0, 0, 0}, {sx, 0, 0}, {sx, sy, 0}, {0, sy, 0}, {0, 0, sz}, {sx, 0, sz}, {sx, sy, sz}, {0, sy, sz}};
}

HexCorners unit_cube() { return box(1, 1, 1); }

HexCorners jitter(std::mt19937_64& rng, double amount) {
  std::uniform_real_distribution<double> u(-amount, amount);
  HexCorners x = unit_cube();
  for (auto& p : x) p = p + Vec3{u(rng), u(rng), u(rng)};
  return x;
}

// Independent sample evaluation: corner frames from explicit neighbor lists
// and the body-center frame from face averages.
std::array<double, 9> oracle_jacobians(const HexCorners& x) {
  const int nb[8][3] = {{1, 3, 4}, {2, 0, 5}, {3, 1, 6}, {0, 2, 7}, {7, 5, 0}, {4, 6, 1}, {5, 7, 2}, {6, 4, 3}};
  std::array<double, 9> out{};
  for (int c = 0; c < 8; ++c) {
    const Vec3 a = x[nb[c][0]] - x[c];
    const Vec3 b = x[nb[c][1]] - x[c];
    const Vec3 d = x[nb[c][2]] - x[c];
    out[c] = a.x * (b.y * d.z - b.z * d.y) - a.y * (b.x * d.z - b.z * d.x) + a.z * (b.x * d.y - b.y * d.x);
  }
  auto fc = [&](int i, int j, int k, int l) { return (x[i] + x[j] + x[k] + x[l]) * 0.25; };
  const Vec3 a = fc(1, 2, 6, 5) - fc(0, 3, 7, 4);
  const Vec3 b = fc(3, 2, 6, 7) - fc(0, 1, 5, 4);
  const Vec3 d = fc(4, 5, 6, 7) - fc(0, 1, 2, 3);
  out[8] = dot(a, cross(b, d));
  return out;
}

Vec3 rotate(const Vec3& p, const std::array<double, 4>& q) {
  // Unit quaternion (w, x, y, z) rotation.
  const Vec3 u{q[1], q[2], q[3]};
  const double w = q[0];
  return u * (2.0 * dot(u, p)) + p * (w * w - dot(u, u)) + cross(u, p) * (2.0 * w);
}

std::array<double, 4> random_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::array<double, 4> q{n(rng), n(rng), n(rng), n(rng)};
  const double len = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (auto& v : q) v /= len;
  return q;
}

// Parallelepiped with unit edges whose vertical edge makes angle phi with the
// base plane: J = SJ = sin(phi) at every sample and the mean edge is 1.
HexCorners sheared(double phi) {
  const Vec3 v{std::cos(phi), 0.0, std::sin(phi)};
  HexCorners x = unit_cube();
  for (int i = 4; i < 8; ++i) x[i] = x[i - 4] + v;
  return x;
}

double frozen_energy(const HexCorners& x, double theta, double ebar) {
  HexQuality hq = hex_quality(x);
  hq.mean_edge_length = ebar;
  return element_energy(hq, theta);
}

double second_smallest_gap(const std::array<double, 9>& v) {
  auto s = v;
  std::sort(s.begin(), s.end());
  return s[1] - s[0];
}

}  // namespace

TEST_CASE("jacobian examples") {
  const HexCorners cube = unit_cube();
  CHECK(jacobian(sample_frame(cube, 0)) == doctest::Approx(1.0));
  CHECK(jacobian(sample_frame(box(2, 2, 2), 0)) == doctest::Approx(8.0));
  SampleFrame f{{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{1, 0, 0}}};
  CHECK(jacobian(f) == 0.0);
}

TEST_CASE("scaled_jacobian examples") {
  CHECK(scaled_jacobian(sample_frame(unit_cube(), 0)).value == doctest::Approx(1.0));
  for (double s : {0.01, 0.5, 3.0, 1e4}) {
    CHECK(scaled_jacobian(sample_frame(box(s, s, s), 5)).value == doctest::Approx(1.0).epsilon(1e-14));
  }
  SampleFrame f{{Vec3{1, 0, 0}, Vec3{1, 1, 0} * (1.0 / std::sqrt(2.0)), Vec3{0, 0, 1}}};
  CHECK(scaled_jacobian(f).value == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  SampleFrame collapsed{{Vec3{1, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 1}}};
  const auto sj = scaled_jacobian(collapsed);
  CHECK(sj.value == 0.0);
  CHECK(sj.degenerate);
}

TEST_CASE("hex_quality examples") {
  const auto cube = hex_quality(unit_cube());
  CHECK(cube.jacobian == doctest::Approx(1.0));
  CHECK(cube.scaled_jacobian == doctest::Approx(1.0));
  CHECK(cube.mean_edge_length == doctest::Approx(1.0));

  const auto aniso = hex_quality(box(2, 1, 1));
  CHECK(aniso.scaled_jacobian == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(aniso.mean_edge_length == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

  // Corner 0 reflected through the plane of its three neighbors (x+y+z = 1).
  HexCorners reflected = unit_cube();
  reflected[0] = Vec3{2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0};
  const auto hq = hex_quality(reflected);
  const auto oracle = oracle_jacobians(reflected);
  for (int s = 0; s < 9; ++s) CHECK(hq.jacobians[s] == doctest::Approx(oracle[s]).epsilon(1e-14));
  CHECK(*std::min_element(oracle.begin(), oracle.end()) < 0.0);
  CHECK(hq.scaled_jacobian < 0.0);
  CHECK(hq.jacobian < 0.0);
}

TEST_CASE("hex_quality matches the independent sample oracle") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 1000; ++t) {
    const HexCorners x = jitter(rng, 0.6);
    const auto hq = hex_quality(x);
    const auto oracle = oracle_jacobians(x);
    for (int s = 0; s < 9; ++s) CHECK(hq.jacobians[s] == doctest::Approx(oracle[s]).epsilon(1e-12));
    const auto mn = std::min_element(oracle.begin(), oracle.end());
    CHECK(hq.jacobian == doctest::Approx(*mn).epsilon(1e-12));
  }
}

TEST_CASE("argmin ties go to the lowest sample") {
  const auto hq = hex_quality(unit_cube());
  CHECK(hq.jacobian_argmin == 0);
  CHECK(hq.scaled_argmin == 0);
}

TEST_CASE("resj / rehj / rehqj examples") {
  HexQuality hq;
  hq.mean_edge_length = 1.0;

  hq.jacobian = 1.0;
  hq.scaled_jacobian = 0.9;
  CHECK(resj(hq, 0.6) == 0.6);
  hq.scaled_jacobian = 0.3;
  CHECK(resj(hq, 0.6) == 0.3);
  hq.jacobian = -0.5;
  hq.scaled_jacobian = -0.5;
  CHECK(resj(hq, 0.0) == -0.5);

  hq.jacobian = -2.0;
  hq.scaled_jacobian = -0.3;
  for (double th : {0.0, 0.3, 0.9}) CHECK(rehj(hq, th) == -2.0);
  hq.jacobian = 0.5;
  hq.scaled_jacobian = 0.4;
  CHECK(rehj(hq, 0.6) == 0.4);
  hq.scaled_jacobian = 0.7;
  CHECK(rehj(hq, 0.6) == 0.6);

  CHECK(rehqj(hex_quality(unit_cube()), 0.6) == 0.6);
  hq.jacobian = -2.0;
  hq.mean_edge_length = 0.5;
  CHECK(rehqj(hq, 0.3) == -4.0);
  hq.jacobian = 1.0;
  hq.scaled_jacobian = 0.5;
  hq.mean_edge_length = 2.0;
  CHECK(rehqj(hq, 0.6) == 2.0);
}

TEST_CASE("rehqj branch exclusivity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(0.0, 1.0);
  std::size_t seen[3] = {0, 0, 0};
  for (int t = 0; t < 5000; ++t) {
    const auto hq = hex_quality(jitter(rng, 0.5));
    const double theta = th(rng);
    const bool neg = hq.jacobian <= 0.0;
    const bool sj = !neg && hq.scaled_jacobian <= theta;
    const bool clamp = !neg && hq.scaled_jacobian > theta;
    CHECK(int(neg) + int(sj) + int(clamp) == 1);
    const auto br = rehqj_branch(hq, theta);
    const double v = rehqj(hq, theta);
    if (neg) {
      CHECK(br == RehqjBranch::NegativeJacobian);
      CHECK(v == hq.jacobian / hq.mean_edge_length);
    } else if (sj) {
      CHECK(br == RehqjBranch::ScaledJacobian);
      CHECK(v == hq.scaled_jacobian * hq.mean_edge_length * hq.mean_edge_length);
    } else {
      CHECK(br == RehqjBranch::Clamped);
      CHECK(v == theta);
    }
    ++seen[static_cast<int>(br)];
  }
  CHECK(seen[0] > 0);
  CHECK(seen[1] > 0);
  CHECK(seen[2] > 0);
}

TEST_CASE("rehqj is continuous across J = 0") {
  for (double phi : {1e-9, -1e-9, 3e-10, -5e-9}) {
    const auto hq = hex_quality(sheared(phi));
    CHECK(std::abs(hq.jacobian) < 1e-8);
    CHECK(hq.mean_edge_length == doctest::Approx(1.0).epsilon(1e-12));
    for (double theta : {0.0, 0.01, 0.5}) CHECK(std::abs(rehqj(hq, theta)) < 1e-6);
  }
}

TEST_CASE("scaled Jacobian invariants on random hexes") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> sc(0.1, 10.0);
  std::uniform_real_distribution<double> tr(-50.0, 50.0);
  for (int t = 0; t < 10000; ++t) {
    const HexCorners x = jitter(rng, 0.45);
    const auto hq = hex_quality(x);
    CHECK(hq.scaled_jacobian >= -1.0);
    CHECK(hq.scaled_jacobian <= 1.0);
    for (int s = 0; s < 9; ++s) {
      CHECK(hq.scaled[s] >= -1.0);
      CHECK(hq.scaled[s] <= 1.0);
      if (hq.jacobians[s] != 0.0) CHECK((hq.jacobians[s] > 0.0) == (hq.scaled[s] > 0.0));
    }
    CHECK(hq.mean_edge_length > 0.0);

    const auto q = random_quaternion(rng);
    const Vec3 shift{tr(rng), tr(rng), tr(rng)};
    const double s = sc(rng);
    HexCorners moved, scaled;
    for (int i = 0; i < 8; ++i) {
      moved[i] = rotate(x[i], q) + shift;
      scaled[i] = x[i] * s;
    }
    const auto hm = hex_quality(moved);
    const auto hs = hex_quality(scaled);
    CHECK(std::abs(hm.scaled_jacobian - hq.scaled_jacobian) <= 1e-12);
    CHECK(std::abs(hm.jacobian - hq.jacobian) <= 1e-12 * std::max(1.0, std::abs(hq.jacobian)) * 100.0);
    CHECK(std::abs(hs.scaled_jacobian - hq.scaled_jacobian) <= 1e-12);
    for (int k = 0; k < 9; ++k) {
      CHECK(hs.jacobians[k] == doctest::Approx(hq.jacobians[k] * s * s * s).epsilon(1e-12));
    }
  }
}

TEST_CASE("per-sample Jacobian gradients match finite differences") {
  std::mt19937_64 rng(3);
  const double h = 1e-6;
  for (int t = 0; t < 50; ++t) {
    HexCorners x = jitter(rng, 0.3);
    for (int s = 0; s < 9; ++s) {
      const auto gj = jacobian_gradient(x, s);
      const auto gs = scaled_jacobian_gradient(x, s);
      for (int v = 0; v < 8; ++v) {
        for (int a = 0; a < 3; ++a) {
          HexCorners xp = x, xm = x;
          xp[v][a] += h;
          xm[v][a] -= h;
          const double fj = (jacobian(sample_frame(xp, s)) - jacobian(sample_frame(xm, s))) / (2 * h);
          const double fs =
              (scaled_jacobian(sample_frame(xp, s)).value - scaled_jacobian(sample_frame(xm, s)).value) / (2 * h);
          CHECK(gj[v][a] == doctest::Approx(fj).epsilon(1e-6).scale(1.0));
          CHECK(gs[v][a] == doctest::Approx(fs).epsilon(1e-6).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("rehqj gradient matches finite differences per branch") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> th(0.05, 0.95);
  const double h = 1e-6;
  std::size_t tested[3] = {0, 0, 0};
  std::size_t attempts = 0;
  while ((tested[0] < 100 || tested[1] < 100 || tested[2] < 100) && attempts < 200000) {
    ++attempts;
    const HexCorners x = jitter(rng, 0.55);
    const double theta = th(rng);
    const auto hq = hex_quality(x);
    const auto br = rehqj_branch(hq, theta);
    const int b = static_cast<int>(br);
    if (tested[b] >= 100) continue;
    // Away from branch boundaries and argmin ties.
    if (std::abs(hq.jacobian) < 1e-4 || std::abs(hq.scaled_jacobian - theta) < 1e-4) continue;
    if (second_smallest_gap(hq.jacobians) < 1e-4 || second_smallest_gap(hq.scaled) < 1e-4) continue;
    if (std::any_of(hq.degenerate.begin(), hq.degenerate.end(), [](bool d) { return d; })) continue;

    const auto g = rehqj_gradient(x, theta);
    double diff2 = 0.0, norm2 = 0.0;
    for (int v = 0; v < 8; ++v) {
      for (int a = 0; a < 3; ++a) {
        HexCorners xp = x, xm = x;
        xp[v][a] += h;
        xm[v][a] -= h;
        const double fd = (frozen_energy(xp, theta, hq.mean_edge_length) -
                           frozen_energy(xm, theta, hq.mean_edge_length)) / (2 * h);
        diff2 += (fd - g[v][a]) * (fd - g[v][a]);
        norm2 += g[v][a] * g[v][a];
      }
    }
    if (br == RehqjBranch::Clamped) {
      CHECK(norm2 == 0.0);
      CHECK(std::sqrt(diff2) < 1e-9);
    } else {
      CHECK(std::sqrt(diff2) < 1e-5 * std::sqrt(norm2));
    }
    ++tested[b];
  }
  CHECK(tested[0] == 100);
  CHECK(tested[1] == 100);
  CHECK(tested[2] == 100);
}

TEST_CASE("clamp branch has zero gradient") {
  const auto g = rehqj_gradient(unit_cube(), 0.6);
  for (const auto& v : g) CHECK(v == Vec3{0, 0, 0});
}

TEST_CASE("degenerate samples contribute zero gradient") {
  HexCorners x = unit_cube();
  x[1] = x[0];  // collapse edge 0-1
  for (int s : {0, 1}) {
    const auto g = scaled_jacobian_gradient(x, s);
    for (const auto& v : g) CHECK(v == Vec3{0, 0, 0});
  }
}

TEST_CASE("rehqj gradient scales linearly under uniform scaling") {
  std::mt19937_64 rng(5);
  int neg = 0, pos = 0;
  for (int t = 0; t < 400 && (neg < 20 || pos < 20); ++t) {
    const HexCorners x = jitter(rng, 0.55);
    const auto hq = hex_quality(x);
    const auto br = rehqj_branch(hq, 0.95);
    if (br == RehqjBranch::Clamped) continue;
    if (second_smallest_gap(hq.jacobians) < 1e-6 || second_smallest_gap(hq.scaled) < 1e-6) continue;
    const auto g1 = rehqj_gradient(x, 0.95);
    for (double s : {2.0, 4.0}) {
      HexCorners xs;
      for (int i = 0; i < 8; ++i) xs[i] = x[i] * s;
      REQUIRE(rehqj_branch(hex_quality(xs), 0.95) == br);
      const auto gs = rehqj_gradient(xs, 0.95);
      for (int v = 0; v < 8; ++v) {
        for (int a = 0; a < 3; ++a) CHECK(gs[v][a] == doctest::Approx(s * g1[v][a]).epsilon(1e-9).scale(1e-9));
      }
    }
    (br == RehqjBranch::NegativeJacobian ? neg : pos)++;
  }
  CHECK(neg >= 20);
  CHECK(pos >= 20);
}

TEST_CASE("all-samples mode averages per-sample values") {
  std::mt19937_64 rng(8);
  const HexCorners x = jitter(rng, 0.3);
  const auto hq = hex_quality(x);
  double sum = 0.0;
  for (int s = 0; s < 9; ++s) {
    HexQuality one = hq;
    one.jacobian = hq.jacobians[s];
    one.scaled_jacobian = hq.scaled[s];
    sum += rehqj(one, 0.7);
  }
  CHECK(element_energy(hq, 0.7, SampleMode::AllSamples) == doctest::Approx(sum / 9.0).epsilon(1e-14));
  CHECK(element_energy(hq, 0.7, SampleMode::ArgminOnly) == rehqj(hq, 0.7));
}

TEST_CASE("mesh-level sums") {
  HexMesh m = grid_mesh(3, 3, 3, {0, 0, 0}, {3, 3, 3});
  CHECK(mesh_energy(m, 0.6) == doctest::Approx(16.2).epsilon(1e-14));
  CHECK(mesh_resj_sum(m, 0.6) == doctest::Approx(27 * 0.6).epsilon(1e-14));
  CHECK(resj_target_met(m, 0.6));
  CHECK(mesh_min_scaled_jacobian(m) == doctest::Approx(1.0));

  // Push interior vertex (1,1,1) through the far corner of its hex.
  const Index v = 1 + 4 * (1 + 4 * 1);
  m.vertices[v] = Vec3{2.6, 2.6, 2.6};
  CHECK(mesh_resj_sum(m, 0.0) < 0.0);
  CHECK_FALSE(resj_target_met(m, 0.0));
}

TEST_CASE("resj target met iff every hex reaches theta") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> th(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const HexMesh m = perturb_interior(grid_mesh(2, 2, 2), 0.4, rng());
    const double theta = th(rng);
    bool all = true;
    for (std::size_t h = 0; h < m.hexes.size(); ++h) all = all && hex_quality(m.corners(h)).scaled_jacobian >= theta;
    CHECK(resj_target_met(m, theta) == all);
  }
}

TEST_CASE("histogram bins") {
  CHECK(histogram_bin(-1.0) == 0);
  CHECK(histogram_bin(-0.95) == 0);
  CHECK(histogram_bin(-0.9) == 1);
  CHECK(histogram_bin(0.0) == 10);
  CHECK(histogram_bin(0.8999) == 18);
  CHECK(histogram_bin(0.9) == 19);
  CHECK(histogram_bin(1.0) == 19);
}

TEST_CASE("quality_report") {
  Fixture fx = cube_grid_fixture(3);
  auto bind = classify_boundary_vertices(fx.mesh, extract_boundary(fx.mesh), fx.surface, fx.features);
  auto r = quality_report(fx.mesh, fx.surface, bind);
  CHECK(r.max_dist == 0.0);
  CHECK(r.min_scaled_jacobian == doctest::Approx(1.0));
  CHECK(r.histogram[19] == 27);
  CHECK(r.inverted == 0);

  // Face vertex at the center of the z = 1 face, displaced outward by 0.1.
  HexMesh moved = fx.mesh;
  const Index v = 1 + 4 * (1 + 4 * 3);
  moved.vertices[v] = moved.vertices[v] + Vec3{0, 0, 0.1};
  r = quality_report(moved, fx.surface, bind);
  CHECK(r.max_dist == doctest::Approx(0.1 / std::sqrt(3.0)).epsilon(1e-12));
  std::size_t total = 0;
  for (auto c : r.histogram) total += c;
  CHECK(total == 27);
}
