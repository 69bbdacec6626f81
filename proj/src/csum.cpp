#include "orbispec/csum.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

namespace orbi {

namespace {

constexpr double kPi = std::numbers::pi;

bool power_of_two(int k) { return k > 0 && (k & (k - 1)) == 0; }

// metric must equal the identity on triangles meeting the annulus
// [r, 1.25 r] about the center
void require_flat_annulus(const OrbiMesh& mesh, const MetricField& field, const Vec2& center,
                          double r, const char* what) {
  bool any = false;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    Vec2 cen = (mesh.corners[t].col(0) + mesh.corners[t].col(1) + mesh.corners[t].col(2)) / 3.0;
    double d = (cen - center).norm();
    if (d < r * 0.9 || d > r * 1.3) continue;
    any = true;
    if ((field.at(t) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument(std::string("build_connected_sum: non-flat excision annulus on ") +
                                  what);
  }
  if (!any)
    throw std::invalid_argument(std::string("build_connected_sum: excision annulus unresolved on ") +
                                what);
}

Eigen::Matrix2d sym_log2(const Eigen::Matrix2d& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g);
  Eigen::Vector2d l = es.eigenvalues();
  if (!(l[0] > 0)) throw std::runtime_error("mollify: matrix not positive definite");
  Eigen::Vector2d ln(std::log(l[0]), std::log(l[1]));
  return es.eigenvectors() * ln.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::Matrix2d sym_exp2(const Eigen::Matrix2d& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
  Eigen::Vector2d l = es.eigenvalues();
  Eigen::Vector2d ex(std::exp(l[0]), std::exp(l[1]));
  return es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Eigen::VectorXd GluedComplex::restrict1(const Eigen::VectorXd& u) const {
  Eigen::VectorXd r(mesh1.n_vertices());
  for (int v = 0; v < mesh1.n_vertices(); ++v) r[v] = u[dof1[v]];
  return r;
}

Eigen::VectorXd GluedComplex::restrict2(const Eigen::VectorXd& u) const {
  Eigen::VectorXd r(mesh2.n_vertices());
  for (int v = 0; v < mesh2.n_vertices(); ++v) r[v] = u[dof2[v]];
  return r;
}

GluedComplex build_connected_sum(const ConnectedSumInput& o1, const ConnectedSumInput& o2,
                                 const ConnectedSumConfig& config) {
  if (!(config.epsilon > 0 && config.epsilon < 1))
    throw std::invalid_argument("build_connected_sum: epsilon must lie in (0,1)");
  if (!power_of_two(config.k_boundary) || config.k_boundary < 8)
    throw std::invalid_argument("build_connected_sum: k_boundary must be a power of two >= 8");
  if (!o1.mesh.boundary_loops.empty() || !o2.mesh.boundary_loops.empty())
    throw std::invalid_argument("build_connected_sum: factors must be closed");
  if (o1.mesh.is_cone_vertex(config.p1))
    throw std::invalid_argument("build_connected_sum: singular p1 is not supported");

  const double eps = config.epsilon;
  const int k = config.k_boundary;

  GluedComplex gc;
  gc.epsilon = eps;
  gc.pairing_offset = config.pairing_offset;

  OrbiMesh m1 = resolve_disc(o1.mesh, config.p1, eps, k);
  ExciseResult e1 = excise_ball(m1, config.p1, eps, k);
  OrbiMesh m2 = resolve_disc(o2.mesh, config.p2, 1.0, k);
  ExciseResult e2 = excise_ball(m2, config.p2, 1.0, k);

  gc.mesh1 = std::move(e1.mesh);
  gc.mesh2 = std::move(e2.mesh);
  gc.p1_chart = e1.center;
  gc.p2_chart = e2.center;
  gc.ring1 = e1.ring;
  gc.ring2 = e2.ring;

  gc.g1 = o1.metric.materialize(gc.mesh1);
  MetricField g2 = o2.metric.materialize(gc.mesh2);
  require_flat_annulus(gc.mesh1, gc.g1, gc.p1_chart, eps, "O1");
  require_flat_annulus(gc.mesh2, g2, gc.p2_chart, 1.0, "O2");
  gc.g2_scaled = scale(g2, eps * eps);
  gc.g2_scaled.tag = MetricField::Tag::PiecewiseInterface;

  // node pairing: ring1 angle theta -> ring2 angle (offset - theta), i.e.
  // index i -> (off - i) mod k with off = round(offset * k / 2pi)
  const int off = static_cast<int>(std::llround(config.pairing_offset * k / (2 * kPi)));
  for (int i = 0; i < k; ++i) {
    int j = ((off - i) % k + k) % k;
    gc.pairing.emplace_back(gc.ring1[i], gc.ring2[j]);
  }

  // glued dofs: factor-1 vertices keep their ids; unpaired factor-2
  // vertices follow; paired ring2 nodes take their ring1 partner's id
  gc.dof1.resize(gc.mesh1.n_vertices());
  for (int v = 0; v < gc.mesh1.n_vertices(); ++v) gc.dof1[v] = v;
  gc.dof2.assign(gc.mesh2.n_vertices(), -1);
  for (const auto& [a, b] : gc.pairing) gc.dof2[b] = a;
  int next = gc.mesh1.n_vertices();
  for (int v = 0; v < gc.mesh2.n_vertices(); ++v)
    if (gc.dof2[v] < 0) gc.dof2[v] = next++;
  gc.n_dofs = next;

  // interface loop bookkeeping
  auto find_loop = [](const OrbiMesh& mesh, int node) {
    for (size_t l = 0; l < mesh.boundary_loops.size(); ++l)
      for (int v : mesh.boundary_loops[l])
        if (v == node) return static_cast<int>(l);
    throw std::runtime_error("build_connected_sum: ring node missing from boundary loops");
  };
  gc.ring_loop1 = find_loop(gc.mesh1, gc.ring1[0]);
  gc.ring_loop2 = find_loop(gc.mesh2, gc.ring2[0]);

  // interface isometry: paired boundary edges must have equal glued-metric
  // length within 1%
  {
    auto ring_edge_len = [&](const OrbiMesh& mesh, const MetricField& f, int a, int b) {
      for (int t = 0; t < mesh.n_triangles(); ++t)
        for (int c = 0; c < 3; ++c) {
          int u = mesh.triangles[t][c], v = mesh.triangles[t][(c + 1) % 3];
          if ((u == a && v == b) || (u == b && v == a)) return metric_edge_length(mesh, f, t, c);
        }
      throw std::runtime_error("build_connected_sum: ring edge not found");
    };
    for (int i = 0; i < k; ++i) {
      int a1 = gc.ring1[i], b1 = gc.ring1[(i + 1) % k];
      int a2 = gc.pairing[i].second, b2 = gc.pairing[(i + 1) % k].second;
      double l1 = ring_edge_len(gc.mesh1, gc.g1, a1, b1);
      double l2 = ring_edge_len(gc.mesh2, gc.g2_scaled, a2, b2);
      if (std::abs(l1 - l2) > 0.01 * std::max(l1, l2))
        throw std::runtime_error("build_connected_sum: interface is not an isometry");
    }
  }

  // orientation: every directed interface edge of mesh1's ring loop must be
  // matched by the reversed directed edge on mesh2's ring loop
  {
    std::set<std::pair<int, int>> loop2_directed;
    const auto& L2 = gc.mesh2.boundary_loops[gc.ring_loop2];
    for (size_t i = 0; i < L2.size(); ++i)
      loop2_directed.insert({L2[i], L2[(i + 1) % L2.size()]});
    std::vector<int> partner(gc.mesh2.n_vertices() + gc.mesh1.n_vertices(), -1);
    std::vector<int> to2(gc.mesh1.n_vertices(), -1);
    for (const auto& [a, b] : gc.pairing) to2[a] = b;
    const auto& L1 = gc.mesh1.boundary_loops[gc.ring_loop1];
    (void)partner;
    for (size_t i = 0; i < L1.size(); ++i) {
      int a = L1[i], b = L1[(i + 1) % L1.size()];
      if (!loop2_directed.count({to2[b], to2[a]}))
        throw std::runtime_error("build_connected_sum: pairing does not reverse orientation");
    }
  }

  return gc;
}

double glued_volume(const GluedComplex& gc) {
  return total_area(gc.mesh1, gc.g1) + total_area(gc.mesh2, gc.g2_scaled);
}

namespace {

// consistent P1 mass pairing applied elementwise
double factor_l2_inner(const OrbiMesh& mesh, const MetricField& f, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v) {
  double acc = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    double a = triangle_metric_area(mesh, f, t);
    const auto& T = mesh.triangles[t];
    double su = u[T[0]] + u[T[1]] + u[T[2]];
    double sv = v[T[0]] + v[T[1]] + v[T[2]];
    double dot = u[T[0]] * v[T[0]] + u[T[1]] * v[T[1]] + u[T[2]] * v[T[2]];
    acc += a / 12.0 * (su * sv + dot);
  }
  return acc;
}

}  // namespace

double glued_l2_inner(const GluedComplex& gc, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v) {
  if (u.size() != gc.n_dofs || v.size() != gc.n_dofs)
    throw std::invalid_argument("glued_l2_inner: dimension mismatch");
  return factor_l2_inner(gc.mesh1, gc.g1, gc.restrict1(u), gc.restrict1(v)) +
         factor_l2_inner(gc.mesh2, gc.g2_scaled, gc.restrict2(u), gc.restrict2(v));
}

// --- mollification ----------------------------------------------------------

namespace {

// Collar frame at a point: the Jacobian of the map from the factor chart to
// Fermi-like collar coordinates (u, v), where u is the signed g_eps distance
// to the interface (positive into O1) and v = eps * theta is arc length
// along it.
struct CollarFrame {
  double u = 0;     // signed distance to the seam
  double varc = 0;  // arc-length coordinate along the seam
  Eigen::Matrix2d J;
};

CollarFrame side1_frame(const Vec2& x, const Vec2& p1, double eps) {
  CollarFrame f;
  Vec2 d = x - p1;
  double rho = d.norm();
  f.u = rho - eps;
  double ca = d.x() / rho, sa = d.y() / rho;
  f.varc = eps * std::atan2(d.y(), d.x());
  f.J << ca, sa, -eps * sa / rho, eps * ca / rho;
  return f;
}

CollarFrame side2_frame(const Vec2& x, const Vec2& p2, double eps, double offset) {
  CollarFrame f;
  Vec2 d = x - p2;
  double s = d.norm();
  f.u = eps * (1.0 - s);  // negative outside the unit circle
  double cb = d.x() / s, sb = d.y() / s;
  double beta = std::atan2(d.y(), d.x());
  f.varc = eps * (offset - beta);
  f.J << -eps * cb, -eps * sb, eps * sb / s, -eps * cb / s;
  return f;
}

double wrap_dist(double a, double b, double period) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

}  // namespace

std::pair<MetricField, MetricField> mollify_across_interface(const GluedComplex& gc,
                                                             double width) {
  MetricField out1 = gc.g1, out2 = gc.g2_scaled;
  out1.tag = MetricField::Tag::Smooth;
  out2.tag = MetricField::Tag::Smooth;
  if (width == 0.0) return {out1, out2};
  if (!(width > 0)) throw std::invalid_argument("mollify: width must be nonnegative");

  const double eps = gc.epsilon;
  // interface resolution: the node spacing of the glued circle
  const double h_seam = 2 * kPi * eps / static_cast<double>(gc.ring1.size());
  if (width < 2 * h_seam)
    throw std::invalid_argument("mollify: width below mesh resolution at the interface (need > " +
                                std::to_string(2 * h_seam) + ")");

  // triangles in the collar, with their collar frames and log-matrices
  struct TriInfo {
    int side;
    int t;
    CollarFrame frame;
    Eigen::Matrix2d loghat;
    double area;
  };
  std::vector<TriInfo> collar;
  auto gather = [&](int side, const OrbiMesh& mesh, const MetricField& f, const Vec2& center) {
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      Vec2 cen = (mesh.corners[t].col(0) + mesh.corners[t].col(1) + mesh.corners[t].col(2)) / 3.0;
      CollarFrame fr = side == 1 ? side1_frame(cen, center, eps)
                                 : side2_frame(cen, center, eps, gc.pairing_offset);
      // clamp the collar to half the interface radius so the polar frames
      // stay within the coherent excision charts
      if (std::abs(fr.u) > std::min(width, 0.5 * eps)) continue;
      Eigen::Matrix2d Jinv = fr.J.inverse();
      Eigen::Matrix2d Ghat = Jinv.transpose() * f.at(t) * Jinv;
      collar.push_back({side, t, fr, sym_log2(Ghat), triangle_metric_area(mesh, f, t)});
    }
  };
  gather(1, gc.mesh1, gc.g1, gc.p1_chart);
  gather(2, gc.mesh2, gc.g2_scaled, gc.p2_chart);

  const double period = 2 * kPi * eps;  // seam circumference

  // vertexwise kernel average of collar log-matrices, then re-expansion per
  // triangle as the mean of its vertex values
  auto kernel_avg = [&](double u, double varc) {
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    double wsum = 0;
    for (const auto& cj : collar) {
      double du = u - cj.frame.u;
      double dv = wrap_dist(varc, cj.frame.varc, period);
      double w = cj.area * std::max(0.0, 1.0 - std::hypot(du, dv) / width);
      acc += w * cj.loghat;
      wsum += w;
    }
    if (wsum <= 0) return Eigen::Matrix2d::Zero().eval();
    return (acc / wsum).eval();
  };

  // vertex collar coordinates per side, cached
  std::map<std::pair<int, int>, Eigen::Matrix2d> vertex_avg;
  auto vertex_value = [&](int side, int v, const OrbiMesh& mesh, const Vec2& center) {
    auto key = std::pair{side, v};
    auto it = vertex_avg.find(key);
    if (it != vertex_avg.end()) return it->second;
    CollarFrame fr = side == 1 ? side1_frame(mesh.vertices[v], center, eps)
                               : side2_frame(mesh.vertices[v], center, eps, gc.pairing_offset);
    Eigen::Matrix2d val = kernel_avg(fr.u, fr.varc);
    vertex_avg.emplace(key, val);
    return val;
  };

  for (const auto& ci : collar) {
    const OrbiMesh& mesh = ci.side == 1 ? gc.mesh1 : gc.mesh2;
    const Vec2& center = ci.side == 1 ? gc.p1_chart : gc.p2_chart;
    Eigen::Matrix2d avg = Eigen::Matrix2d::Zero();
    for (int c = 0; c < 3; ++c)
      avg += vertex_value(ci.side, mesh.triangles[ci.t][c], mesh, center);
    avg /= 3.0;
    double eta = std::clamp(2.0 * (1.0 - std::abs(ci.frame.u) / width), 0.0, 1.0);
    Eigen::Matrix2d blended = (1 - eta) * ci.loghat + eta * avg;
    Eigen::Matrix2d Gchart = ci.frame.J.transpose() * sym_exp2(blended) * ci.frame.J;
    if (ci.side == 1)
      out1.base[ci.t] = Gchart / out1.factor;
    else
      out2.base[ci.t] = Gchart / out2.factor;
  }
  return {out1, out2};
}

}  // namespace orbi
