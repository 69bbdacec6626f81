#pragma once

#include "orbispec/csum.hpp"
#include "orbispec/metric.hpp"

#include <Eigen/Sparse>

namespace orbi {

using SpMat = Eigen::SparseMatrix<double>;

// Sparse stiffness K (Dirichlet form) and mass M (L^2 pairing) over P1
// elements with exact per-element integration for constant metrics.
// K is symmetric bit for bit; an optional implicit rank-one term
// c * d d^T supports constant deflation without densifying K.
struct AssembledSystem {
  SpMat K;
  SpMat M;
  int n = 0;
  std::string source;

  bool has_deflation = false;
  Eigen::VectorXd deflate_vec;
  double deflate_coeff = 0.0;

  Eigen::VectorXd apply_K(const Eigen::VectorXd& u) const;
  double k_energy(const Eigen::VectorXd& u) const;  // u^T K u incl. deflation
};

AssembledSystem assemble(const OrbiMesh& mesh, const MetricField& field);
AssembledSystem assemble_glued(const GluedComplex& gc);

// Boundary L^2 mass on one boundary loop (edge-wise P1 quadrature).
SpMat boundary_mass(const OrbiMesh& mesh, const MetricField& field, int loop_index);

double q_norm(const AssembledSystem& sys, const Eigen::VectorXd& u);
double rayleigh(const AssembledSystem& sys, const Eigen::VectorXd& u);

// Mass-only consistency check: factorization of M must succeed.
void require_mass_spd(const AssembledSystem& sys);

// Export in "row col value" coordinate text, sorted row-major.
std::string matrix_coordinate_text(const SpMat& m);

}  // namespace orbi
