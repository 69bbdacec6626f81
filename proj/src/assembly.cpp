#include "orbispec/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace orbi {

namespace {

using Acc = std::map<std::pair<int, int>, double>;  // canonical i <= j

void add_sym(Acc& acc, int i, int j, double v) {
  if (i <= j)
    acc[{i, j}] += v;
  else
    acc[{j, i}] += v;
}

SpMat from_acc(const Acc& acc, int n) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * acc.size());
  for (const auto& [ij, v] : acc) {
    trip.emplace_back(ij.first, ij.second, v);
    if (ij.first != ij.second) trip.emplace_back(ij.second, ij.first, v);
  }
  SpMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

// Element contributions for triangle t under the field, scattered through
// the given vertex->dof map.
void accumulate_element(const OrbiMesh& mesh, const MetricField& field, int t,
                        const std::vector<int>& dof, Acc& accK, Acc& accM) {
  const CornerCoords& X = mesh.corners[t];
  Eigen::Matrix2d E;
  E.col(0) = X.col(1) - X.col(0);
  E.col(1) = X.col(2) - X.col(0);
  const double detE = E.determinant();
  if (!(detE > 0))
    throw std::runtime_error("assemble: nonpositive chart area at triangle " + std::to_string(t));
  const Eigen::Matrix2d G = field.at(t);
  const double detG = G.determinant();
  if (!(detG > 0) || !(G(0, 0) > 0))
    throw std::runtime_error("assemble: degenerate metric at triangle " + std::to_string(t));
  const double w = mesh.chart_weight.empty() ? 1.0 : mesh.chart_weight[t];
  const double area = 0.5 * detE * std::sqrt(detG) * w;

  Eigen::Matrix<double, 3, 2> D;
  D << -1, -1, 1, 0, 0, 1;
  Eigen::Matrix<double, 3, 2> Gr = D * E.inverse();
  Eigen::Matrix3d Kloc = area * Gr * G.inverse() * Gr.transpose();

  int id[3] = {dof[mesh.triangles[t][0]], dof[mesh.triangles[t][1]], dof[mesh.triangles[t][2]]};
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      add_sym(accK, id[i], id[j], i == j ? Kloc(i, i) : Kloc(i, j));
      add_sym(accM, id[i], id[j], area / 12.0 * (i == j ? 2.0 : 1.0));
    }
}

}  // namespace

Eigen::VectorXd AssembledSystem::apply_K(const Eigen::VectorXd& u) const {
  Eigen::VectorXd r = K * u;
  if (has_deflation) r += deflate_coeff * (deflate_vec.dot(u)) * deflate_vec;
  return r;
}

double AssembledSystem::k_energy(const Eigen::VectorXd& u) const {
  double e = u.dot(K * u);
  if (has_deflation) {
    double s = deflate_vec.dot(u);
    e += deflate_coeff * s * s;
  }
  return e;
}

AssembledSystem assemble(const OrbiMesh& mesh, const MetricField& field) {
  if (field.size() != mesh.n_triangles())
    throw std::invalid_argument("assemble: field does not match mesh");
  AssembledSystem sys;
  sys.n = mesh.n_vertices();
  sys.source = "mesh";
  std::vector<int> ident(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) ident[v] = v;
  Acc accK, accM;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    accumulate_element(mesh, field, t, ident, accK, accM);
  sys.K = from_acc(accK, sys.n);
  sys.M = from_acc(accM, sys.n);
  return sys;
}

AssembledSystem assemble_glued(const GluedComplex& gc) {
  AssembledSystem sys;
  sys.n = gc.n_dofs;
  sys.source = "glued";
  Acc accK, accM;
  for (int t = 0; t < gc.mesh1.n_triangles(); ++t)
    accumulate_element(gc.mesh1, gc.g1, t, gc.dof1, accK, accM);
  for (int t = 0; t < gc.mesh2.n_triangles(); ++t)
    accumulate_element(gc.mesh2, gc.g2_scaled, t, gc.dof2, accK, accM);
  sys.K = from_acc(accK, sys.n);
  sys.M = from_acc(accM, sys.n);
  return sys;
}

SpMat boundary_mass(const OrbiMesh& mesh, const MetricField& field, int loop_index) {
  if (loop_index < 0 || loop_index >= static_cast<int>(mesh.boundary_loops.size()))
    throw std::invalid_argument("boundary_mass: no such boundary loop");
  const auto& loop = mesh.boundary_loops[loop_index];
  // locate each loop edge's unique triangle for its metric length
  std::map<std::pair<int, int>, std::pair<int, int>> edge_tri;  // (min,max) -> (tri, local)
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int c = 0; c < 3; ++c) {
      int a = mesh.triangles[t][c], b = mesh.triangles[t][(c + 1) % 3];
      edge_tri[{std::min(a, b), std::max(a, b)}] = {t, c};
    }
  Acc acc;
  for (size_t i = 0; i < loop.size(); ++i) {
    int a = loop[i], b = loop[(i + 1) % loop.size()];
    auto it = edge_tri.find({std::min(a, b), std::max(a, b)});
    if (it == edge_tri.end()) throw std::invalid_argument("boundary_mass: loop edge not in mesh");
    double len = metric_edge_length(mesh, field, it->second.first, it->second.second);
    add_sym(acc, a, a, len / 3.0);
    add_sym(acc, b, b, len / 3.0);
    add_sym(acc, a, b, len / 6.0);
  }
  return from_acc(acc, mesh.n_vertices());
}

double q_norm(const AssembledSystem& sys, const Eigen::VectorXd& u) {
  return std::sqrt(sys.k_energy(u) + u.dot(sys.M * u));
}

double rayleigh(const AssembledSystem& sys, const Eigen::VectorXd& u) {
  double m = u.dot(sys.M * u);
  if (!(m > 0)) throw std::invalid_argument("rayleigh: vector has zero mass norm");
  return sys.k_energy(u) / m;
}

void require_mass_spd(const AssembledSystem& sys) {
  Eigen::SimplicialLLT<SpMat> llt(sys.M);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("mass matrix is not positive definite (assembly bug)");
}

std::string matrix_coordinate_text(const SpMat& m) {
  std::vector<std::array<double, 3>> rows;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      rows.push_back({double(it.row()), double(it.col()), it.value()});
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
  });
  std::ostringstream os;
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", int(r[0]), int(r[1]), r[2]);
    os << buf;
  }
  return os.str();
}

}  // namespace orbi
