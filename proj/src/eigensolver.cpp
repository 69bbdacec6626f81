#include "orbispec/eigensolver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>
#include <stdexcept>

namespace orbi {

namespace {

// Solve (A + c d d^T) x = b given a factorization of A (Sherman-Morrison).
struct ShiftedOperator {
  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool deflated = false;
  double c = 0;
  Eigen::VectorXd d;
  Eigen::VectorXd w;  // A^{-1} d
  double denom = 1;

  void factor(const SpMat& A, const AssembledSystem& sys) {
    ldlt.compute(A);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("solve_smallest: factorization failure (assembly bug?)");
    if (sys.has_deflation) {
      deflated = true;
      c = sys.deflate_coeff;
      d = sys.deflate_vec;
      w = ldlt.solve(d);
      denom = 1.0 + c * d.dot(w);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = ldlt.solve(b);
    if (deflated) x -= (c * d.dot(x) / denom) * w;
    return x;
  }
};

// X <- X R^{-1} with R the Cholesky factor of X^T M X (done twice).
void m_orthonormalize(Eigen::MatrixXd& X, const SpMat& M) {
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::MatrixXd G = X.transpose() * (M * X);
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) {
      // nudge near-dependent blocks and retry
      G.diagonal().array() += 1e-14 * G.trace();
      llt.compute(G);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve_smallest: block lost rank");
    }
    Eigen::MatrixXd U = llt.matrixU();
    X = U.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(X);
  }
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0) return;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * scale) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace

std::vector<int> cluster(const Eigen::VectorXd& eigenvalues, double rel_gap) {
  std::vector<int> id(eigenvalues.size());
  if (eigenvalues.size() == 0) return id;
  int cur = 0;
  id[0] = 0;
  for (int i = 1; i < eigenvalues.size(); ++i) {
    double a = eigenvalues[i - 1], b = eigenvalues[i];
    if (b < a - 1e-12 * std::max(1.0, std::abs(a)))
      throw std::invalid_argument("cluster: eigenvalues not ascending");
    double scale = std::max({std::abs(a), std::abs(b), 1e-9});
    if (b - a > rel_gap * scale) ++cur;
    id[i] = cur;
  }
  return id;
}

AssembledSystem deflate_constants(const AssembledSystem& sys) {
  AssembledSystem out = sys;
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.n);
  Eigen::VectorXd d = sys.M * ones;
  double mass = ones.dot(d);
  double target = sys.K.diagonal().sum() / sys.M.diagonal().sum();  // above the low spectrum
  out.has_deflation = true;
  out.deflate_vec = d;
  out.deflate_coeff = target / mass;
  return out;
}

SpectrumResult solve_smallest(const AssembledSystem& sys, int k, const SolveOptions& opts) {
  const int n = sys.n;
  if (k < 0 || k + 1 > n) throw std::invalid_argument("solve_smallest: need k+1 <= dof count");
  const int want = k + 1;
  const int block = std::min(n, k + 5);

  const double sigma = -1e-3 * sys.M.diagonal().sum() / n;
  SpMat A = sys.K + sigma * sys.M;
  ShiftedOperator op;
  op.factor(A, sys);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = gauss(rng);
  m_orthonormalize(X, sys.M);

  SpectrumResult res;
  Eigen::VectorXd theta(block);
  bool ok = false;
  int iter = 0;
  for (iter = 1; iter <= opts.max_iterations; ++iter) {
    // block shift-invert step
    Eigen::MatrixXd Y(n, block);
    for (int j = 0; j < block; ++j) Y.col(j) = op.solve(sys.M * X.col(j));
    m_orthonormalize(Y, sys.M);
    // Rayleigh-Ritz on the block
    Eigen::MatrixXd H = Y.transpose() * (sys.K * Y);
    if (sys.has_deflation) {
      Eigen::VectorXd s = Y.transpose() * sys.deflate_vec;
      H += sys.deflate_coeff * s * s.transpose();
    }
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    theta = es.eigenvalues();
    X = Y * es.eigenvectors();

    ok = true;
    for (int j = 0; j < want; ++j) {
      Eigen::VectorXd r = sys.apply_K(X.col(j)) - theta[j] * (sys.M * X.col(j));
      double bound = opts.tol * (sys.M * X.col(j)).norm();
      if (r.norm() > bound) {
        ok = false;
        break;
      }
    }
    if (ok) break;
  }

  res.iterations = std::min(iter, opts.max_iterations);
  res.converged = ok;
  res.eigenvalues = theta.head(want);
  res.eigenvectors = X.leftCols(want);
  for (int j = 0; j < want; ++j) fix_sign(res.eigenvectors.col(j));
  res.residuals.resize(want);
  for (int j = 0; j < want; ++j)
    res.residuals[j] =
        (sys.apply_K(res.eigenvectors.col(j)) - res.eigenvalues[j] * (sys.M * res.eigenvectors.col(j)))
            .norm();
  res.clusters = cluster(res.eigenvalues, opts.cluster_rel_gap);
  return res;
}

}  // namespace orbi
