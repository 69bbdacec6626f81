#pragma once

#include "orbispec/mesh.hpp"
#include "orbispec/metric.hpp"

#include <utility>

namespace orbi {

// Collapsed connected sum: excise a ball of radius epsilon about p1 in O1
// and the unit ball about p2 in O2, scale the second factor by epsilon^2,
// and identify the two boundary circles node to node, reversing
// orientation. Both excision neighborhoods must be metrically flat.
struct ConnectedSumConfig {
  double epsilon = 0.2;
  int p1 = -1;
  int p2 = -1;
  int k_boundary = 32;          // power of two
  double pairing_offset = 0.0;  // rotation angle of the identification
};

struct GluedComplex {
  OrbiMesh mesh1;  // O1 minus the epsilon-ball
  OrbiMesh mesh2;  // O2 minus the unit ball
  MetricField g1;         // metric on mesh1
  MetricField g2_scaled;  // epsilon^2 * g2 on mesh2
  double epsilon = 0.0;

  Vec2 p1_chart{0, 0};  // excision chart center on O1
  Vec2 p2_chart{0, 0};  // excision chart center on O2
  double pairing_offset = 0.0;
  std::vector<int> ring1, ring2;                // interface nodes, CCW from angle 0
  std::vector<std::pair<int, int>> pairing;     // ring1 node -> ring2 node
  int ring_loop1 = -1, ring_loop2 = -1;         // boundary loop indices

  std::vector<int> dof1, dof2;  // factor vertex -> glued dof
  int n_dofs = 0;

  // factor restriction of a glued vector
  Eigen::VectorXd restrict1(const Eigen::VectorXd& u) const;
  Eigen::VectorXd restrict2(const Eigen::VectorXd& u) const;
};

struct ConnectedSumInput {
  OrbiMesh mesh;
  MetricSpec metric;
};

GluedComplex build_connected_sum(const ConnectedSumInput& o1, const ConnectedSumInput& o2,
                                 const ConnectedSumConfig& config);

double glued_volume(const GluedComplex& gc);
double glued_l2_inner(const GluedComplex& gc, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v);

// Smooth the glued metric across the interface collar of the given width
// (in g_eps length units): log-matrix kernel averaging in a collar frame.
// Returns the mollified per-factor fields, smooth-tagged. Width 0 is the
// identity; widths under two local edge lengths are rejected.
std::pair<MetricField, MetricField> mollify_across_interface(const GluedComplex& gc,
                                                             double width);

}  // namespace orbi
