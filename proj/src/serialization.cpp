#include "orbispec/serialization.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace orbi {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string expect_token(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error(std::string("mesh format: expected ") + what);
  return tok;
}

void expect_keyword(std::istream& in, const std::string& kw) {
  std::string tok = expect_token(in, kw.c_str());
  if (tok != kw)
    throw std::runtime_error("mesh format: expected '" + kw + "', got '" + tok + "'");
}

int read_int(std::istream& in, const char* what) {
  int v;
  if (!(in >> v)) throw std::runtime_error(std::string("mesh format: bad integer for ") + what);
  return v;
}

double read_dbl(std::istream& in, const char* what) {
  double v;
  if (!(in >> v)) throw std::runtime_error(std::string("mesh format: bad number for ") + what);
  return v;
}

}  // namespace

std::string write_mesh(const OrbiMesh& mesh) {
  std::ostringstream os;
  os << "ORBIMESH 1\n";
  os << "VERTICES " << mesh.n_vertices() << "\n";
  for (int v = 0; v < mesh.n_vertices(); ++v)
    os << v << " " << format_double(mesh.vertices[v].x()) << " "
       << format_double(mesh.vertices[v].y()) << "\n";
  os << "TRIANGLES " << mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "CORNERS " << mesh.n_triangles() << "\n";
  for (const auto& X : mesh.corners) {
    for (int c = 0; c < 3; ++c)
      os << format_double(X(0, c)) << " " << format_double(X(1, c)) << (c < 2 ? " " : "");
    os << "\n";
  }
  if (mesh.has_sphere_coords()) {
    os << "SPHERE " << mesh.n_triangles() << "\n";
    for (const auto& S : mesh.corner_sphere) {
      for (int c = 0; c < 3; ++c)
        os << format_double(S(0, c)) << " " << format_double(S(1, c)) << (c < 2 ? " " : "");
      os << "\n";
    }
  }
  os << "CONES " << mesh.cone_points.size() << "\n";
  for (const auto& cp : mesh.cone_points) os << cp.vertex << " " << cp.order << "\n";
  os << "BOUNDARY " << mesh.boundary_loops.size() << "\n";
  for (const auto& loop : mesh.boundary_loops) {
    os << loop.size();
    for (int v : loop) os << " " << v;
    os << "\n";
  }
  os << "CHARTWEIGHT " << mesh.chart_weight.size() << "\n";
  for (size_t t = 0; t < mesh.chart_weight.size(); ++t)
    os << t << " " << format_double(mesh.chart_weight[t]) << "\n";
  os << "END\n";
  return os.str();
}

OrbiMesh read_mesh(std::istream& in) {
  expect_keyword(in, "ORBIMESH");
  int version = read_int(in, "version");
  if (version != 1) throw std::runtime_error("mesh format: unsupported version");
  OrbiMesh mesh;
  expect_keyword(in, "VERTICES");
  int nv = read_int(in, "vertex count");
  mesh.vertices.resize(nv);
  for (int i = 0; i < nv; ++i) {
    int idx = read_int(in, "vertex index");
    if (idx < 0 || idx >= nv) throw std::runtime_error("mesh format: vertex index out of range");
    double x = read_dbl(in, "x"), y = read_dbl(in, "y");
    mesh.vertices[idx] = Vec2(x, y);
  }
  expect_keyword(in, "TRIANGLES");
  int nt = read_int(in, "triangle count");
  mesh.triangles.resize(nt);
  for (int t = 0; t < nt; ++t)
    for (int c = 0; c < 3; ++c) mesh.triangles[t][c] = read_int(in, "triangle vertex");
  std::string tok = expect_token(in, "section");
  if (tok == "CORNERS") {
    int n = read_int(in, "corner count");
    if (n != nt) throw std::runtime_error("mesh format: CORNERS count mismatch");
    mesh.corners.resize(nt);
    for (int t = 0; t < nt; ++t)
      for (int c = 0; c < 3; ++c) {
        mesh.corners[t](0, c) = read_dbl(in, "corner x");
        mesh.corners[t](1, c) = read_dbl(in, "corner y");
      }
    tok = expect_token(in, "section");
  } else {
    throw std::runtime_error("mesh format: CORNERS section required");
  }
  if (tok == "SPHERE") {
    int n = read_int(in, "sphere count");
    if (n != nt) throw std::runtime_error("mesh format: SPHERE count mismatch");
    mesh.corner_sphere.resize(nt);
    for (int t = 0; t < nt; ++t)
      for (int c = 0; c < 3; ++c) {
        mesh.corner_sphere[t](0, c) = read_dbl(in, "theta");
        mesh.corner_sphere[t](1, c) = read_dbl(in, "phi");
      }
    tok = expect_token(in, "section");
  }
  if (tok != "CONES") throw std::runtime_error("mesh format: expected CONES");
  int nc = read_int(in, "cone count");
  for (int i = 0; i < nc; ++i) {
    ConePoint cp;
    cp.vertex = read_int(in, "cone vertex");
    cp.order = read_int(in, "cone order");
    mesh.cone_points.push_back(cp);
  }
  expect_keyword(in, "BOUNDARY");
  int nl = read_int(in, "loop count");
  for (int l = 0; l < nl; ++l) {
    int len = read_int(in, "loop length");
    std::vector<int> loop(len);
    for (int i = 0; i < len; ++i) loop[i] = read_int(in, "loop vertex");
    mesh.boundary_loops.push_back(std::move(loop));
  }
  expect_keyword(in, "CHARTWEIGHT");
  int nw = read_int(in, "weight count");
  mesh.chart_weight.assign(nt, 1.0);
  for (int i = 0; i < nw; ++i) {
    int t = read_int(in, "weight triangle");
    if (t < 0 || t >= nt) throw std::runtime_error("mesh format: weight index out of range");
    mesh.chart_weight[t] = read_dbl(in, "weight");
  }
  expect_keyword(in, "END");
  return mesh;
}

OrbiMesh read_mesh_string(const std::string& text) {
  std::istringstream is(text);
  return read_mesh(is);
}

std::string write_metric(const MetricField& field) {
  std::ostringstream os;
  os << "METRIC " << field.size() << "\n";
  for (int t = 0; t < field.size(); ++t) {
    Eigen::Matrix2d g = field.at(t);
    os << t << " " << format_double(g(0, 0)) << " " << format_double(g(0, 1)) << " "
       << format_double(g(1, 1)) << "\n";
  }
  os << (field.tag == MetricField::Tag::Smooth ? "TAG smooth\n" : "TAG piecewise-across-interface\n");
  return os.str();
}

MetricField read_metric(std::istream& in) {
  expect_keyword(in, "METRIC");
  int n = read_int(in, "metric count");
  MetricField f;
  f.base.resize(n);
  for (int i = 0; i < n; ++i) {
    int t = read_int(in, "metric triangle");
    if (t < 0 || t >= n) throw std::runtime_error("mesh format: metric index out of range");
    double a = read_dbl(in, "a11"), b = read_dbl(in, "a12"), c = read_dbl(in, "a22");
    f.base[t] << a, b, b, c;
  }
  expect_keyword(in, "TAG");
  std::string tag = expect_token(in, "tag value");
  f.tag = (tag == "smooth") ? MetricField::Tag::Smooth : MetricField::Tag::PiecewiseInterface;
  return f;
}

std::string write_complex(const GluedComplex& gc) {
  std::ostringstream os;
  os << "GLUEDCOMPLEX 1\n";
  os << "EPSILON " << format_double(gc.epsilon) << "\n";
  os << "OFFSET " << format_double(gc.pairing_offset) << "\n";
  os << "P1 " << format_double(gc.p1_chart.x()) << " " << format_double(gc.p1_chart.y()) << "\n";
  os << "P2 " << format_double(gc.p2_chart.x()) << " " << format_double(gc.p2_chart.y()) << "\n";
  os << "MESH1\n" << write_mesh(gc.mesh1) << write_metric(gc.g1);
  os << "MESH2\n" << write_mesh(gc.mesh2) << write_metric(gc.g2_scaled);
  os << "RING1 " << gc.ring1.size();
  for (int v : gc.ring1) os << " " << v;
  os << "\nRING2 " << gc.ring2.size();
  for (int v : gc.ring2) os << " " << v;
  os << "\nPAIRING " << gc.pairing.size() << "\n";
  for (const auto& [a, b] : gc.pairing) os << a << " " << b << "\n";
  os << "ENDCOMPLEX\n";
  return os.str();
}

GluedComplex read_complex(std::istream& in) {
  expect_keyword(in, "GLUEDCOMPLEX");
  if (read_int(in, "version") != 1)
    throw std::runtime_error("complex format: unsupported version");
  GluedComplex gc;
  expect_keyword(in, "EPSILON");
  gc.epsilon = read_dbl(in, "epsilon");
  expect_keyword(in, "OFFSET");
  gc.pairing_offset = read_dbl(in, "offset");
  expect_keyword(in, "P1");
  gc.p1_chart.x() = read_dbl(in, "p1 x");
  gc.p1_chart.y() = read_dbl(in, "p1 y");
  expect_keyword(in, "P2");
  gc.p2_chart.x() = read_dbl(in, "p2 x");
  gc.p2_chart.y() = read_dbl(in, "p2 y");
  expect_keyword(in, "MESH1");
  gc.mesh1 = read_mesh(in);
  gc.g1 = read_metric(in);
  expect_keyword(in, "MESH2");
  gc.mesh2 = read_mesh(in);
  gc.g2_scaled = read_metric(in);
  expect_keyword(in, "RING1");
  int n1 = read_int(in, "ring1 count");
  gc.ring1.resize(n1);
  for (int& v : gc.ring1) v = read_int(in, "ring1 node");
  expect_keyword(in, "RING2");
  int n2 = read_int(in, "ring2 count");
  gc.ring2.resize(n2);
  for (int& v : gc.ring2) v = read_int(in, "ring2 node");
  expect_keyword(in, "PAIRING");
  int np = read_int(in, "pairing count");
  for (int i = 0; i < np; ++i) {
    int a = read_int(in, "pairing a"), b = read_int(in, "pairing b");
    gc.pairing.emplace_back(a, b);
  }
  expect_keyword(in, "ENDCOMPLEX");
  // rebuild the dof identification
  gc.dof1.resize(gc.mesh1.n_vertices());
  for (int v = 0; v < gc.mesh1.n_vertices(); ++v) gc.dof1[v] = v;
  gc.dof2.assign(gc.mesh2.n_vertices(), -1);
  for (const auto& [a, b] : gc.pairing) gc.dof2[b] = a;
  int next = gc.mesh1.n_vertices();
  for (int v = 0; v < gc.mesh2.n_vertices(); ++v)
    if (gc.dof2[v] < 0) gc.dof2[v] = next++;
  gc.n_dofs = next;
  for (size_t l = 0; l < gc.mesh1.boundary_loops.size(); ++l)
    for (int v : gc.mesh1.boundary_loops[l])
      if (!gc.ring1.empty() && v == gc.ring1[0]) gc.ring_loop1 = static_cast<int>(l);
  for (size_t l = 0; l < gc.mesh2.boundary_loops.size(); ++l)
    for (int v : gc.mesh2.boundary_loops[l])
      if (!gc.ring2.empty() && v == gc.ring2[0]) gc.ring_loop2 = static_cast<int>(l);
  return gc;
}

GluedComplex read_complex_string(const std::string& text) {
  std::istringstream is(text);
  return read_complex(is);
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace orbi
