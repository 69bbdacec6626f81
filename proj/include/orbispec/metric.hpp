#pragma once

#include "orbispec/mesh.hpp"

#include <Eigen/Dense>

namespace orbi {

// Riemannian metric on a mesh: one symmetric positive-definite 2x2 matrix
// per triangle, expressed in the triangle's chart (corner) coordinates.
// A lazy scalar factor keeps conformal rescaling exact: scale(scale(g,a),b)
// and scale(g, a*b) produce bitwise-identical matrices.
struct MetricField {
  enum class Tag { Smooth, PiecewiseInterface };

  std::vector<Eigen::Matrix2d> base;
  double factor = 1.0;
  Tag tag = Tag::Smooth;

  int size() const { return static_cast<int>(base.size()); }
  Eigen::Matrix2d at(int t) const { return base[t] * factor; }
};

struct MetricDistanceReport {
  double rho_pp = 0.0;  // sup over triangles of max |ln lambda|
  int argmax_triangle = -1;
};

MetricField euclidean(const OrbiMesh& mesh);

// Pullback of the round metric of the given radius; requires the mesh to
// carry sphere coordinates. Each triangle's matrix reproduces the exact
// great-circle lengths of its three edges, so shared edges agree exactly.
MetricField round_sphere(const OrbiMesh& mesh, double radius);

MetricField scale(const MetricField& field, double c);

// Pointwise log-comparison distance between two fields on the same mesh:
// sup over triangles of max |ln lambda| over eigenvalues lambda of f1^{-1} f2.
MetricDistanceReport rho_double_prime(const MetricField& f1, const MetricField& f2);

// rho'' for a single pair of SPD matrices.
double rho_double_prime_point(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b);

// Blend the field to the Euclidean identity inside radius r_in of the given
// vertex (log-space blend, identity inside, original outside r_out).
MetricField flatten_near(const OrbiMesh& mesh, const MetricField& field, int vertex, double r_in,
                         double r_out);

// Same, centered at a point given in sphere coordinates (usable after the
// center vertex has been excised).
MetricField flatten_near_sphere_point(const OrbiMesh& mesh, const MetricField& field,
                                      const Vec2& center_sph, double r_in, double r_out);

// Metric area of a triangle / of the whole mesh.
double triangle_metric_area(const OrbiMesh& mesh, const MetricField& field, int t);
double total_area(const OrbiMesh& mesh, const MetricField& field);

// Metric length of edge (corner c -> c+1) of triangle t.
double metric_edge_length(const OrbiMesh& mesh, const MetricField& field, int t, int c);

// Largest relative mismatch of shared-edge lengths between adjacent
// triangles; smooth-tagged fields must stay below 1e-8.
double edge_length_mismatch(const OrbiMesh& mesh, const MetricField& field);

void require_spd(const MetricField& field);

// The SPD matrix G with e_i^T G e_i = len_i^2 for the triangle's three chart
// edges. Throws if the lengths violate the triangle inequality.
Eigen::Matrix2d metric_from_edge_lengths(const CornerCoords& corners, double l01, double l12,
                                         double l20);

// Descriptor from which a field can be re-materialized after mesh surgery.
struct MetricSpec {
  enum class Kind { Euclidean, RoundSphere, FlattenedSphere };
  Kind kind = Kind::Euclidean;
  double radius = 1.0;                  // sphere kinds
  Vec2 flatten_center_sphere{0, 0};     // FlattenedSphere: (theta, phi)
  double flatten_r_in = 0.0;
  double flatten_r_out = 0.0;
  double scale_factor = 1.0;

  MetricField materialize(const OrbiMesh& mesh) const;
};

}  // namespace orbi
