#include "orbispec/metric.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace orbi {

namespace {

Eigen::Matrix2d sym_log(const Eigen::Matrix2d& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g);
  Eigen::Vector2d l = es.eigenvalues();
  if (!(l[0] > 0)) throw std::runtime_error("sym_log: matrix not positive definite");
  Eigen::Vector2d ln(std::log(l[0]), std::log(l[1]));
  return es.eigenvectors() * ln.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::Matrix2d sym_exp(const Eigen::Matrix2d& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
  Eigen::Vector2d l = es.eigenvalues();
  Eigen::Vector2d ex(std::exp(l[0]), std::exp(l[1]));
  return es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().transpose();
}

double great_circle(const Vec2& a, const Vec2& b) {
  auto unit = [](const Vec2& s) {
    double st = std::sin(s.x()), ct = std::cos(s.x());
    return Eigen::Vector3d(st * std::cos(s.y()), st * std::sin(s.y()), ct);
  };
  Eigen::Vector3d u = unit(a), v = unit(b);
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

}  // namespace

MetricField euclidean(const OrbiMesh& mesh) {
  MetricField f;
  f.base.assign(mesh.n_triangles(), Eigen::Matrix2d::Identity());
  return f;
}

Eigen::Matrix2d metric_from_edge_lengths(const CornerCoords& X, double l01, double l12,
                                         double l20) {
  // e^T G e = l^2 for the three chart edges; linear in (g00, g01, g11)
  Eigen::Matrix3d A;
  Eigen::Vector3d rhs(l01 * l01, l12 * l12, l20 * l20);
  Vec2 e[3] = {X.col(1) - X.col(0), X.col(2) - X.col(1), X.col(0) - X.col(2)};
  for (int i = 0; i < 3; ++i)
    A.row(i) << e[i].x() * e[i].x(), 2 * e[i].x() * e[i].y(), e[i].y() * e[i].y();
  Eigen::Vector3d g = A.fullPivLu().solve(rhs);
  Eigen::Matrix2d G;
  G << g[0], g[1], g[1], g[2];
  if (!(G(0, 0) > 0) || !(G.determinant() > 0))
    throw std::runtime_error("metric_from_edge_lengths: lengths do not form a triangle");
  return G;
}

MetricField round_sphere(const OrbiMesh& mesh, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("round_sphere: radius must be positive");
  if (!mesh.has_sphere_coords())
    throw std::invalid_argument("round_sphere: mesh carries no sphere coordinates");
  MetricField f;
  f.base.reserve(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const CornerCoords& S = mesh.corner_sphere[t];
    double l01 = radius * great_circle(S.col(0), S.col(1));
    double l12 = radius * great_circle(S.col(1), S.col(2));
    double l20 = radius * great_circle(S.col(2), S.col(0));
    f.base.push_back(metric_from_edge_lengths(mesh.corners[t], l01, l12, l20));
  }
  return f;
}

MetricField scale(const MetricField& field, double c) {
  if (!(c > 0)) throw std::invalid_argument("scale: factor must be positive");
  MetricField f = field;
  f.factor = field.factor * c;
  return f;
}

double rho_double_prime_point(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(b, a);  // b x = l a x
  Eigen::Vector2d l = es.eigenvalues();
  if (!(l[0] > 0)) throw std::runtime_error("rho_double_prime: matrices not positive definite");
  return std::max(std::abs(std::log(l[0])), std::abs(std::log(l[1])));
}

MetricDistanceReport rho_double_prime(const MetricField& f1, const MetricField& f2) {
  if (f1.size() != f2.size()) throw std::invalid_argument("rho_double_prime: field size mismatch");
  MetricDistanceReport rep;
  for (int t = 0; t < f1.size(); ++t) {
    double r = rho_double_prime_point(f1.at(t), f2.at(t));
    if (r > rep.rho_pp) {
      rep.rho_pp = r;
      rep.argmax_triangle = t;
    }
  }
  return rep;
}

namespace {

// distance from a point to each triangle centroid: geodesic via sphere
// coordinates when the center is given on the sphere, otherwise minimum
// over chart realizations of the center
std::vector<double> centroid_distances_sphere(const OrbiMesh& mesh, const Vec2& center_sph) {
  std::vector<double> d(mesh.n_triangles(), 0.0);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    Vec2 cs = (mesh.corner_sphere[t].col(0) + mesh.corner_sphere[t].col(1) +
               mesh.corner_sphere[t].col(2)) /
              3.0;
    d[t] = great_circle(center_sph, cs);
  }
  return d;
}

std::vector<double> centroid_distances_chart(const OrbiMesh& mesh,
                                             const std::vector<Vec2>& realizations) {
  std::vector<double> d(mesh.n_triangles(), std::numeric_limits<double>::infinity());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    Vec2 cen = (mesh.corners[t].col(0) + mesh.corners[t].col(1) + mesh.corners[t].col(2)) / 3.0;
    for (const auto& q : realizations) d[t] = std::min(d[t], (cen - q).norm());
  }
  return d;
}

MetricField flatten_by_distance(const MetricField& field, const std::vector<double>& d,
                                double r_in, double r_out) {
  MetricField out;
  out.base.resize(field.size());
  out.tag = field.tag;
  for (int t = 0; t < field.size(); ++t) {
    double u = (r_out - d[t]) / (r_out - r_in);
    double beta = u <= 0 ? 0.0 : (u >= 1 ? 1.0 : u * u * (3 - 2 * u));
    if (beta == 0.0) {
      out.base[t] = field.at(t);
    } else if (beta == 1.0) {
      out.base[t] = Eigen::Matrix2d::Identity();
    } else {
      out.base[t] = sym_exp((1 - beta) * sym_log(field.at(t)));
    }
    if (!(out.base[t](0, 0) > 0) || !(out.base[t].determinant() > 0))
      throw std::runtime_error("flatten_near: blend lost positive-definiteness");
  }
  return out;
}

}  // namespace

MetricField flatten_near_sphere_point(const OrbiMesh& mesh, const MetricField& field,
                                      const Vec2& center_sph, double r_in, double r_out) {
  if (!(r_in > 0 && r_in < r_out))
    throw std::invalid_argument("flatten_near: need 0 < r_in < r_out");
  if (!mesh.has_sphere_coords())
    throw std::invalid_argument("flatten_near_sphere_point: mesh carries no sphere coordinates");
  return flatten_by_distance(field, centroid_distances_sphere(mesh, center_sph), r_in, r_out);
}

MetricField flatten_near(const OrbiMesh& mesh, const MetricField& field, int vertex, double r_in,
                         double r_out) {
  if (!(r_in > 0 && r_in < r_out))
    throw std::invalid_argument("flatten_near: need 0 < r_in < r_out");
  if (vertex < 0 || vertex >= mesh.n_vertices())
    throw std::invalid_argument("flatten_near: vertex out of range");
  for (const auto& cp : mesh.cone_points) {
    if (cp.vertex == vertex) continue;
    if (mesh.chart_distance(cp.vertex, mesh.vertices[vertex]) < r_out)
      throw std::invalid_argument("flatten_near: annulus contains a cone point");
  }
  if (mesh.has_sphere_coords()) {
    for (int t = 0; t < mesh.n_triangles(); ++t)
      for (int c = 0; c < 3; ++c)
        if (mesh.triangles[t][c] == vertex)
          return flatten_near_sphere_point(mesh, field, mesh.corner_sphere[t].col(c), r_in,
                                           r_out);
    throw std::invalid_argument("flatten_near: isolated vertex");
  }
  std::vector<Vec2> reals{mesh.vertices[vertex]};
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int c = 0; c < 3; ++c)
      if (mesh.triangles[t][c] == vertex) {
        Vec2 p = mesh.corners[t].col(c);
        bool dup = false;
        for (const auto& q : reals)
          if ((q - p).norm() < 1e-12) dup = true;
        if (!dup) reals.push_back(p);
      }
  return flatten_by_distance(field, centroid_distances_chart(mesh, reals), r_in, r_out);
}

double triangle_metric_area(const OrbiMesh& mesh, const MetricField& field, int t) {
  double w = mesh.chart_weight.empty() ? 1.0 : mesh.chart_weight[t];
  return w * mesh.chart_area(t) * std::sqrt(field.at(t).determinant());
}

double total_area(const OrbiMesh& mesh, const MetricField& field) {
  double a = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t) a += triangle_metric_area(mesh, field, t);
  return a;
}

double metric_edge_length(const OrbiMesh& mesh, const MetricField& field, int t, int c) {
  Vec2 e = mesh.corners[t].col((c + 1) % 3) - mesh.corners[t].col(c);
  return std::sqrt(e.dot(field.at(t) * e));
}

double edge_length_mismatch(const OrbiMesh& mesh, const MetricField& field) {
  std::map<std::pair<int, int>, std::pair<int, int>> first_use;  // edge -> (tri, local)
  double worst = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int c = 0; c < 3; ++c) {
      int a = mesh.triangles[t][c], b = mesh.triangles[t][(c + 1) % 3];
      auto key = a < b ? std::pair{a, b} : std::pair{b, a};
      auto it = first_use.find(key);
      if (it == first_use.end()) {
        first_use[key] = {t, c};
      } else {
        double l1 = metric_edge_length(mesh, field, it->second.first, it->second.second);
        double l2 = metric_edge_length(mesh, field, t, c);
        worst = std::max(worst, std::abs(l1 - l2) / std::max(l1, l2));
      }
    }
  return worst;
}

void require_spd(const MetricField& field) {
  for (int t = 0; t < field.size(); ++t) {
    Eigen::Matrix2d g = field.at(t);
    if (std::abs(g(0, 1) - g(1, 0)) > 1e-14 * g.norm())
      throw std::runtime_error("metric not symmetric at triangle " + std::to_string(t));
    if (!(g(0, 0) > 0) || !(g.determinant() > 0))
      throw std::runtime_error("metric not positive definite at triangle " + std::to_string(t));
  }
}

MetricField MetricSpec::materialize(const OrbiMesh& mesh) const {
  MetricField f;
  switch (kind) {
    case Kind::Euclidean:
      f = euclidean(mesh);
      break;
    case Kind::RoundSphere:
      f = round_sphere(mesh, radius);
      break;
    case Kind::FlattenedSphere:
      f = flatten_near_sphere_point(mesh, round_sphere(mesh, radius), flatten_center_sphere,
                                    flatten_r_in, flatten_r_out);
      break;
  }
  if (scale_factor != 1.0) f = scale(f, scale_factor);
  return f;
}

}  // namespace orbi
