#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace orbi {

using Vec2 = Eigen::Vector2d;
using CornerCoords = Eigen::Matrix<double, 2, 3>;  // one column per corner

struct ConePoint {
  int vertex = -1;
  int order = 2;  // cyclic isotropy order m >= 2, total angle 2*pi/m
};

// Triangulated 2-orbifold: underlying surface meshed in the quotient.
//
// Connectivity lives in `triangles` (vertex index triples, positively
// oriented). Geometry lives in `corners`: each triangle stores its own
// chart coordinates for its three corners. For plain planar regions the
// corner coordinates equal the vertex coordinates; across identification
// seams (torus wrap, pillowcase fold, spindle pole charts) they differ by
// the identifying isometry. All geometric queries go through `corners`,
// so a vertex may sit on a seam without ambiguity.
//
// `corner_sphere` optionally carries per-corner (theta, phi) coordinates
// on the unit sphere for meshes that parametrize a round surface; the
// metric module uses them to pull back the round metric exactly.
//
// Meshes are immutable after construction: every operation returns a new
// value.
struct OrbiMesh {
  std::vector<Vec2> vertices;  // representative chart position per vertex
  std::vector<std::array<int, 3>> triangles;
  std::vector<CornerCoords> corners;
  std::vector<CornerCoords> corner_sphere;  // empty for flat meshes
  std::vector<ConePoint> cone_points;
  std::vector<std::vector<int>> boundary_loops;  // ordered vertex cycles
  std::vector<double> chart_weight;              // per-triangle, default 1

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  bool has_sphere_coords() const { return !corner_sphere.empty(); }

  double chart_area(int t) const;
  // Euclidean chart angle at local corner c of triangle t.
  double corner_angle(int t, int c) const;
  double total_chart_area() const;
  double max_edge_length() const;
  bool is_cone_vertex(int v) const;
  std::optional<int> cone_order(int v) const;

  int euler_characteristic() const;

  // Chart distance from x to the vertex: minimum over corner realizations
  // of v and of `from`. Exact within a flat chart neighborhood; an upper
  // proxy elsewhere (straight chart segments are geodesic realizations).
  double chart_distance(int v, const Vec2& from) const;
};

struct MeshCheckReport {
  bool ok = true;
  std::vector<std::string> failures;
  void fail(std::string msg);
};

// Structural invariants: positive chart areas, edge-manifoldness,
// connectivity, coherent orientation, boundary loops partitioning the
// boundary edges, interior cone points, cone angle sums 2*pi/m.
MeshCheckReport check_mesh(const OrbiMesh& mesh, double angle_tol = 1e-8);
void require_valid(const OrbiMesh& mesh, double angle_tol = 1e-8);

// Sum of incident chart corner angles at a vertex.
double vertex_angle_sum(const OrbiMesh& mesh, int v);

// --- builders -------------------------------------------------------------

// Flat square torus [0,side]^2 with periodic identifications, structured
// triangulation, max edge <= 1.5*h.
OrbiMesh build_flat_torus(double side, double h);

// Flat orbifold T^2/Z2 on the fundamental domain [0,side]x[0,side/2]:
// x-periodic, top and bottom edges folded, four order-2 cone points.
// grading in (0,1] shrinks edges toward the cone points by that ratio.
OrbiMesh build_pillowcase(double side, double h, double grading = 1.0);

// Quotient S^2/Z_m of the unit round sphere (m = 1 gives the sphere),
// meshed in azimuthal-equidistant charts from both poles; two cone points
// of order m for m >= 2. Carries sphere coordinates; the round metric is
// supplied by the metric module.
OrbiMesh build_spindle(int m, double h);

// Flat disc of the given radius with k_boundary equally spaced boundary
// nodes on the circle (node i at angle 2*pi*i/k). Used for harmonic
// extension across an excised ball.
OrbiMesh build_disc(double radius, int k_boundary, double h);

// --- surgery ---------------------------------------------------------------

// Quadrisect every triangle, preserving cone and boundary markers.
OrbiMesh refine(const OrbiMesh& mesh);

// Split each edge incident to `vertex` at metric parameter `ratio` from the
// vertex, with all new nodes placed on a common circle (radius = ratio *
// shortest incident edge). Repeated application grades geometrically.
OrbiMesh grade_toward(const OrbiMesh& mesh, int vertex, double ratio);

// Double the angular resolution of the triangle fan around `vertex` by
// splitting every fan base edge at its midpoint (with conforming splits of
// the outer neighbors).
OrbiMesh split_fan(const OrbiMesh& mesh, int vertex);

struct ExciseResult {
  OrbiMesh mesh;
  std::vector<int> old_to_new;  // -1 for removed vertices
  std::vector<int> ring;        // new boundary nodes, CCW from angle 0
  Vec2 center;                  // chart position of the excised center
};

// Remove the metric ball B(center, r) and retriangulate conformingly with a
// new boundary loop of exactly k_boundary nodes on the circle of radius r.
// Requires a locally flat, chart-coherent, cone-free neighborhood.
ExciseResult excise_ball(const OrbiMesh& mesh, int center, double r, int k_boundary);

// Conforming bisection around `center` until local edges near the circle of
// radius r are below ~1.25 * 2*pi*r/k_boundary (relaxing proportionally to
// the distance from the center).
OrbiMesh resolve_disc(const OrbiMesh& mesh, int center, double r, int k_boundary,
                      double ratio = 0.5);

struct ReplaceDiscResult {
  OrbiMesh mesh;
  int center = -1;              // the re-inserted center vertex
  std::vector<int> old_to_new;  // -1 for vertices of the replaced disc
};

// Swap the disc B(center, R) for a structured stack of concentric k-gon
// rings with geometric radii (ratio per ring) down to inner_target, closed
// by a center fan. Radial functions of the distance to the center are
// resolved uniformly well on the result. Flat charts only.
ReplaceDiscResult replace_disc(const OrbiMesh& mesh, int center, double R, int k_boundary,
                               double ratio = 0.9, double inner_target = 1e-3);

// Index of the vertex whose representative position is nearest to p.
int nearest_vertex(const OrbiMesh& mesh, const Vec2& p);

// Area of the inscribed k-gon used as the discrete excision disc.
double polygon_disc_area(double r, int k);
// Perimeter of the inscribed k-gon (discrete circle circumference).
double polygon_circle_length(double r, int k);

}  // namespace orbi
