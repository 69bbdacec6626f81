#include "orbispec/eigensolver.hpp"

#include "orbispec/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace orbi;

namespace {
constexpr double kPi = std::numbers::pi;

AssembledSystem torus_system(double h) {
  OrbiMesh torus = build_flat_torus(2 * kPi, h);
  return assemble(torus, euclidean(torus));
}
}  // namespace

TEST_CASE("torus spectrum matches the lattice oracle") {
  AssembledSystem sys = torus_system(0.12);
  SpectrumResult spec = solve_smallest(sys, 9);
  REQUIRE(spec.converged);
  auto oracle = reference_spectrum({ReferenceModel::Kind::Torus, 2 * kPi, 1}, 10);
  CHECK(std::abs(spec.eigenvalues[0]) <= 1e-8);
  for (int j = 1; j < 10; ++j)
    CHECK(std::abs(spec.eigenvalues[j] - oracle[j]) / oracle[j] < 0.03);

  // invariants: ascending, residual certification, M-orthonormality
  for (int j = 1; j < 10; ++j) CHECK(spec.eigenvalues[j] >= spec.eigenvalues[j - 1]);
  for (int j = 0; j < 10; ++j) {
    Eigen::VectorXd u = spec.eigenvectors.col(j);
    CHECK(spec.residuals[j] <= 1e-8 * (sys.M * u).norm());
  }
  Eigen::MatrixXd G = spec.eigenvectors.transpose() * (sys.M * spec.eigenvectors);
  CHECK((G - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-8);

  // first cluster above zero has size 4
  CHECK(spec.clusters[0] == 0);
  CHECK(spec.clusters[1] == spec.clusters[4]);
  CHECK(spec.clusters[4] != spec.clusters[5]);
}

TEST_CASE("solver is deterministic under a fixed seed") {
  AssembledSystem sys = torus_system(0.35);
  SolveOptions opts;
  opts.seed = 99;
  SpectrumResult a = solve_smallest(sys, 6, opts);
  SpectrumResult b = solve_smallest(sys, 6, opts);
  for (int j = 0; j <= 6; ++j) {
    CHECK(a.eigenvalues[j] == b.eigenvalues[j]);
    for (int i = 0; i < sys.n; ++i) CHECK(a.eigenvectors(i, j) == b.eigenvectors(i, j));
  }
}

TEST_CASE("shift invariance: K + sigma M shifts eigenvalues by sigma") {
  AssembledSystem sys = torus_system(0.35);
  SpectrumResult base = solve_smallest(sys, 5);
  for (double sigma : {0.5, 2.0, 7.5}) {
    AssembledSystem shifted = sys;
    shifted.K = SpMat(sys.K + sigma * sys.M);
    SpectrumResult s = solve_smallest(shifted, 5);
    for (int j = 0; j <= 5; ++j)
      CHECK(std::abs(s.eigenvalues[j] - (base.eigenvalues[j] + sigma)) <=
            1e-7 * std::max(1.0, base.eigenvalues[j] + sigma));
  }
}

TEST_CASE("min-max: random subspaces bound lambda_k from above") {
  AssembledSystem sys = torus_system(0.35);
  const int k = 4;
  SpectrumResult spec = solve_smallest(sys, k);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd Y(sys.n, k + 1);
    for (int j = 0; j <= k; ++j)
      for (int i = 0; i < sys.n; ++i) Y(i, j) = gauss(rng);
    Eigen::MatrixXd A = Y.transpose() * (sys.K * Y);
    Eigen::MatrixXd B = Y.transpose() * (sys.M * Y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    double sup = es.eigenvalues().maxCoeff();
    CHECK(sup >= spec.eigenvalues[k] * (1 - 1e-10));
  }
}

TEST_CASE("cluster partitions by relative gap") {
  Eigen::VectorXd v(4);
  v << 0.0, 1.00, 1.01, 2.3;
  auto c = cluster(v, 0.05);
  CHECK(c == std::vector<int>{0, 1, 1, 2});
  Eigen::VectorXd w(3);
  w << 1.0, 10.0, 100.0;
  CHECK(cluster(w, 0.05) == std::vector<int>{0, 1, 2});
}

TEST_CASE("deflating the constants exposes lambda_1 and keeps the rest") {
  AssembledSystem sys = torus_system(0.3);
  SpectrumResult base = solve_smallest(sys, 6);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.n);
  CHECK(rayleigh(sys, ones) <= 1e-10);

  AssembledSystem defl = deflate_constants(sys);
  SpectrumResult d = solve_smallest(defl, 6);
  CHECK(std::abs(d.eigenvalues[0] - base.eigenvalues[1]) <=
        1e-6 * std::max(1.0, base.eigenvalues[1]));
  CHECK(std::abs(d.eigenvalues[5] - base.eigenvalues[6]) <= 1e-9 * base.eigenvalues[6]);
}

TEST_CASE("pillowcase and spindle spectra match counting oracles (coarse sanity)") {
  OrbiMesh pc = build_pillowcase(2 * kPi, 0.15, 0.5);
  AssembledSystem psys = assemble(pc, euclidean(pc));
  SpectrumResult ps = solve_smallest(psys, 5);
  auto poracle = reference_spectrum({ReferenceModel::Kind::Pillowcase, 2 * kPi, 1}, 6);
  for (int j = 1; j <= 5; ++j)
    CHECK(std::abs(ps.eigenvalues[j] - poracle[j]) / poracle[j] < 0.05);

  OrbiMesh sp = build_spindle(3, 0.1);
  AssembledSystem ssys = assemble(sp, round_sphere(sp, 1.0));
  SpectrumResult ss = solve_smallest(ssys, 4);
  auto soracle = reference_spectrum({ReferenceModel::Kind::Spindle, 1.0, 3}, 5);
  for (int j = 1; j <= 4; ++j)
    CHECK(std::abs(ss.eigenvalues[j] - soracle[j]) / soracle[j] < 0.05);
}

TEST_CASE("non-convergence is flagged, not hidden") {
  AssembledSystem sys = torus_system(0.3);
  SolveOptions opts;
  opts.max_iterations = 1;
  opts.tol = 1e-14;
  SpectrumResult s = solve_smallest(sys, 8, opts);
  CHECK_FALSE(s.converged);
}
