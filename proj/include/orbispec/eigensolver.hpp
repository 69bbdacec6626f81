#pragma once

#include "orbispec/assembly.hpp"

#include <cstdint>

namespace orbi {

// Smallest eigenpairs of K u = lambda M u with certified residuals.
struct SpectrumResult {
  Eigen::VectorXd eigenvalues;   // ascending, k+1 entries
  Eigen::MatrixXd eigenvectors;  // M-orthonormal columns
  Eigen::VectorXd residuals;     // ||K u - lambda M u||_2 per pair
  std::vector<int> clusters;     // numerical multiplicity groups
  bool converged = true;
  int iterations = 0;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iterations = 500;
  std::uint64_t seed = 20240229;
  double cluster_rel_gap = 0.02;
};

// Block shift-invert iteration with Rayleigh-Ritz projection, block size
// k+5, sparse LDLT of (K + sigma M), sigma = -1e-3 * trace(M)/n.
SpectrumResult solve_smallest(const AssembledSystem& sys, int k, const SolveOptions& opts = {});

// Consecutive eigenvalues with relative gap below rel_gap share a cluster.
std::vector<int> cluster(const Eigen::VectorXd& eigenvalues, double rel_gap);

// Shift the constant eigenvector out of the low spectrum by an implicit
// rank-one update; the rest of the spectrum is untouched.
AssembledSystem deflate_constants(const AssembledSystem& sys);

}  // namespace orbi
