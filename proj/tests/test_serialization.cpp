#include "orbispec/serialization.hpp"

#include "orbispec/assembly.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace orbi;

namespace {
constexpr double kPi = std::numbers::pi;

void check_mesh_equal(const OrbiMesh& a, const OrbiMesh& b) {
  REQUIRE(a.n_vertices() == b.n_vertices());
  REQUIRE(a.n_triangles() == b.n_triangles());
  for (int v = 0; v < a.n_vertices(); ++v) {
    CHECK(a.vertices[v].x() == b.vertices[v].x());
    CHECK(a.vertices[v].y() == b.vertices[v].y());
  }
  for (int t = 0; t < a.n_triangles(); ++t) {
    CHECK(a.triangles[t] == b.triangles[t]);
    CHECK((a.corners[t] - b.corners[t]).norm() == 0.0);
    if (a.has_sphere_coords()) CHECK((a.corner_sphere[t] - b.corner_sphere[t]).norm() == 0.0);
    CHECK(a.chart_weight[t] == b.chart_weight[t]);
  }
  REQUIRE(a.cone_points.size() == b.cone_points.size());
  for (size_t i = 0; i < a.cone_points.size(); ++i) {
    CHECK(a.cone_points[i].vertex == b.cone_points[i].vertex);
    CHECK(a.cone_points[i].order == b.cone_points[i].order);
  }
  REQUIRE(a.boundary_loops.size() == b.boundary_loops.size());
  for (size_t l = 0; l < a.boundary_loops.size(); ++l) CHECK(a.boundary_loops[l] == b.boundary_loops[l]);
}
}  // namespace

TEST_CASE("mesh round trip: torus, pillowcase, spindle, excised") {
  for (int which = 0; which < 4; ++which) {
    OrbiMesh m;
    if (which == 0) m = build_flat_torus(2 * kPi, 0.4);
    if (which == 1) m = build_pillowcase(2 * kPi, 0.4, 0.5);
    if (which == 2) m = build_spindle(3, 0.15);
    if (which == 3) {
      OrbiMesh torus = build_flat_torus(2 * kPi, 0.3);
      m = excise_ball(torus, nearest_vertex(torus, Vec2(kPi, kPi)), 0.4, 16).mesh;
    }
    std::string text = write_mesh(m);
    OrbiMesh back = read_mesh_string(text);
    check_mesh_equal(m, back);
    CHECK(write_mesh(back) == text);
  }
}

TEST_CASE("17-digit coordinates round-trip bit for bit") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 100; ++i) {
    double v = std::ldexp(u(rng), static_cast<int>(rng() % 40) - 20);
    std::istringstream is(format_double(v));
    double back;
    is >> back;
    CHECK(back == v);
  }
}

TEST_CASE("metric block round trip") {
  OrbiMesh sp = build_spindle(2, 0.2);
  MetricField f = scale(round_sphere(sp, 1.3), 0.17);
  std::string text = write_metric(f);
  std::istringstream is(text);
  MetricField back = read_metric(is);
  REQUIRE(back.size() == f.size());
  for (int t = 0; t < f.size(); ++t) CHECK((back.at(t) - f.at(t)).norm() == 0.0);
  CHECK(back.tag == f.tag);
}

TEST_CASE("glued complex round trip") {
  ConnectedSumInput o1{build_flat_torus(2 * kPi, 0.3), {}};
  ConnectedSumInput o2{build_pillowcase(8.0, 0.4), {}};
  ConnectedSumConfig cfg;
  cfg.epsilon = 0.3;
  cfg.p1 = nearest_vertex(o1.mesh, Vec2(kPi, kPi));
  cfg.p2 = nearest_vertex(o2.mesh, Vec2(4.0, 2.0));
  cfg.k_boundary = 16;
  GluedComplex gc = build_connected_sum(o1, o2, cfg);
  std::string text = write_complex(gc);
  GluedComplex back = read_complex_string(text);
  CHECK(back.epsilon == gc.epsilon);
  CHECK(back.n_dofs == gc.n_dofs);
  CHECK(back.pairing == gc.pairing);
  CHECK(back.dof2 == gc.dof2);
  CHECK(write_complex(back) == text);
}

TEST_CASE("coordinate export is sorted row-major") {
  OrbiMesh torus = build_flat_torus(2 * kPi, 0.8);
  AssembledSystem sys = assemble(torus, euclidean(torus));
  std::string text = matrix_coordinate_text(sys.K);
  std::istringstream is(text);
  long long prev = -1;
  int r, c;
  double v;
  while (is >> r >> c >> v) {
    long long key = static_cast<long long>(r) * sys.n + c;
    CHECK(key > prev);
    prev = key;
  }
}

TEST_CASE("content hash is deterministic and sensitive") {
  OrbiMesh torus = build_flat_torus(2 * kPi, 0.5);
  std::string a = write_mesh(torus);
  CHECK(fnv1a64(a) == fnv1a64(a));
  std::string b = a;
  b[b.size() / 2] ^= 1;
  CHECK(fnv1a64(a) != fnv1a64(b));
}
