#include "orbispec/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>
#include <sstream>
#include <stdexcept>

namespace orbi {

namespace {

constexpr double kPi = std::numbers::pi;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

using EdgeKey = std::pair<int, int>;
EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

struct EdgeUse {
  int tri;
  int local;  // edge from corner local to (local+1)%3
  bool forward;
};

std::map<EdgeKey, std::vector<EdgeUse>> build_edge_map(const OrbiMesh& mesh) {
  std::map<EdgeKey, std::vector<EdgeUse>> edges;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int c = 0; c < 3; ++c) {
      int a = tri[c], b = tri[(c + 1) % 3];
      edges[edge_key(a, b)].push_back({t, c, a < b});
    }
  }
  return edges;
}

// Distance from point p to triangle t in chart coordinates.
double triangle_distance(const OrbiMesh& mesh, int t, const Vec2& p) {
  const CornerCoords& X = mesh.corners[t];
  // inside test
  double s0 = cross2(X.col(1) - X.col(0), p - X.col(0));
  double s1 = cross2(X.col(2) - X.col(1), p - X.col(1));
  double s2 = cross2(X.col(0) - X.col(2), p - X.col(2));
  if (s0 >= 0 && s1 >= 0 && s2 >= 0) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 3; ++c) {
    Vec2 a = X.col(c), b = X.col((c + 1) % 3);
    Vec2 ab = b - a;
    double len2 = ab.squaredNorm();
    double s = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    d = std::min(d, (a + s * ab - p).norm());
  }
  return d;
}

std::vector<std::vector<int>> trace_boundary_loops(const OrbiMesh& mesh) {
  auto edges = build_edge_map(mesh);
  // directed boundary edges a->b as they appear in their unique triangle
  std::map<int, int> next;
  for (const auto& [key, uses] : edges) {
    if (uses.size() != 1) continue;
    const auto& u = uses[0];
    const auto& tri = mesh.triangles[u.tri];
    int a = tri[u.local], b = tri[(u.local + 1) % 3];
    next[a] = b;
  }
  std::vector<std::vector<int>> loops;
  std::set<int> seen;
  for (const auto& [start, unused] : next) {
    if (seen.count(start)) continue;
    std::vector<int> loop;
    int v = start;
    do {
      loop.push_back(v);
      seen.insert(v);
      auto it = next.find(v);
      if (it == next.end()) throw std::runtime_error("boundary trace: open chain");
      v = it->second;
    } while (v != start && loop.size() <= next.size() + 1);
    if (v != start) throw std::runtime_error("boundary trace: loop does not close");
    loops.push_back(std::move(loop));
  }
  return loops;
}

// Node on a ring being zipped: vertex id, chart position, unwrapped angle,
// and optional sphere coordinates.
struct RingNode {
  int v;
  Vec2 pos;
  double angle;
  Vec2 sph{0, 0};
};

// Triangulate the annulus between two rings given CCW with ascending
// unwrapped angles; both arrays carry a closing sentinel (first node
// repeated with angle += period). Emits outer.size()-1 + inner.size()-1
// positively oriented triangles. The advance direction is chosen by the
// shorter diagonal, with the angular order and triangle positivity as
// guards, which stays robust when the rings are radially close.
void zipper(const std::vector<RingNode>& outer, const std::vector<RingNode>& inner,
            bool with_sphere, std::vector<std::array<int, 3>>& tris,
            std::vector<CornerCoords>& corners, std::vector<CornerCoords>& corner_sph) {
  size_t i = 0, j = 0;
  const size_t nO = outer.size() - 1, nI = inner.size() - 1;
  auto emit = [&](const RingNode& a, const RingNode& b, const RingNode& c) {
    tris.push_back({a.v, b.v, c.v});
    CornerCoords X;
    X.col(0) = a.pos;
    X.col(1) = b.pos;
    X.col(2) = c.pos;
    corners.push_back(X);
    if (with_sphere) {
      CornerCoords S;
      S.col(0) = a.sph;
      S.col(1) = b.sph;
      S.col(2) = c.sph;
      corner_sph.push_back(S);
    }
  };
  auto area2 = [](const RingNode& a, const RingNode& b, const RingNode& c) {
    return cross2(b.pos - a.pos, c.pos - a.pos);
  };
  while (i < nO || j < nI) {
    bool can_outer = i < nO, can_inner = j < nI;
    double aO = can_outer ? area2(outer[i], outer[i + 1], inner[j]) : -1;
    double aI = can_inner ? area2(outer[i], inner[j + 1], inner[j]) : -1;
    bool advance_outer;
    if (can_outer && can_inner) {
      // don't let one ring run far ahead of the other
      if (outer[i + 1].angle > inner[j + 1].angle + 1e-12 && aI > 0)
        advance_outer = false;
      else if (inner[j + 1].angle > outer[i + 1].angle + 1e-12 && aO > 0)
        advance_outer = true;
      else {
        double dO = (outer[i + 1].pos - inner[j].pos).norm();
        double dI = (inner[j + 1].pos - outer[i].pos).norm();
        advance_outer = dO <= dI;
        if (advance_outer && aO <= 0 && aI > 0) advance_outer = false;
        if (!advance_outer && aI <= 0 && aO > 0) advance_outer = true;
      }
    } else {
      advance_outer = can_outer;
    }
    if (advance_outer) {
      emit(outer[i], outer[i + 1], inner[j]);
      ++i;
    } else {
      emit(outer[i], inner[j + 1], inner[j]);
      ++j;
    }
  }
}

std::vector<RingNode> close_ring(std::vector<RingNode> ring, double period) {
  RingNode first = ring.front();
  first.angle += period;
  ring.push_back(first);
  return ring;
}

}  // namespace

void MeshCheckReport::fail(std::string msg) {
  ok = false;
  failures.push_back(std::move(msg));
}

double OrbiMesh::chart_area(int t) const {
  const CornerCoords& X = corners[t];
  return 0.5 * cross2(X.col(1) - X.col(0), X.col(2) - X.col(0));
}

double OrbiMesh::corner_angle(int t, int c) const {
  const CornerCoords& X = corners[t];
  Vec2 u = X.col((c + 1) % 3) - X.col(c);
  Vec2 w = X.col((c + 2) % 3) - X.col(c);
  return std::atan2(cross2(u, w), u.dot(w));
}

double OrbiMesh::total_chart_area() const {
  double a = 0;
  for (int t = 0; t < n_triangles(); ++t) a += chart_area(t);
  return a;
}

double OrbiMesh::max_edge_length() const {
  double m = 0;
  for (const auto& X : corners)
    for (int c = 0; c < 3; ++c) m = std::max(m, (X.col((c + 1) % 3) - X.col(c)).norm());
  return m;
}

bool OrbiMesh::is_cone_vertex(int v) const {
  return cone_order(v).has_value();
}

std::optional<int> OrbiMesh::cone_order(int v) const {
  for (const auto& cp : cone_points)
    if (cp.vertex == v) return cp.order;
  return std::nullopt;
}

int OrbiMesh::euler_characteristic() const {
  std::set<EdgeKey> edges;
  for (const auto& tri : triangles)
    for (int c = 0; c < 3; ++c) edges.insert(edge_key(tri[c], tri[(c + 1) % 3]));
  return n_vertices() - static_cast<int>(edges.size()) + n_triangles();
}

double OrbiMesh::chart_distance(int v, const Vec2& from) const {
  double d = (vertices[v] - from).norm();
  for (int t = 0; t < n_triangles(); ++t)
    for (int c = 0; c < 3; ++c)
      if (triangles[t][c] == v) d = std::min(d, (corners[t].col(c) - from).norm());
  return d;
}

double vertex_angle_sum(const OrbiMesh& mesh, int v) {
  double sum = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int c = 0; c < 3; ++c)
      if (mesh.triangles[t][c] == v) sum += mesh.corner_angle(t, c);
  return sum;
}

MeshCheckReport check_mesh(const OrbiMesh& mesh, double angle_tol) {
  MeshCheckReport rep;
  const int nv = mesh.n_vertices(), nt = mesh.n_triangles();
  if (nt == 0) {
    rep.fail("empty mesh");
    return rep;
  }
  if (static_cast<int>(mesh.corners.size()) != nt) rep.fail("corners size mismatch");
  if (!mesh.chart_weight.empty() && static_cast<int>(mesh.chart_weight.size()) != nt)
    rep.fail("chart_weight size mismatch");
  if (mesh.has_sphere_coords() && static_cast<int>(mesh.corner_sphere.size()) != nt)
    rep.fail("corner_sphere size mismatch");
  for (int t = 0; t < nt; ++t) {
    for (int c = 0; c < 3; ++c) {
      int v = mesh.triangles[t][c];
      if (v < 0 || v >= nv) {
        rep.fail("triangle vertex out of range");
        return rep;
      }
    }
    if (mesh.chart_area(t) <= 0) rep.fail("nonpositive chart area at triangle " + std::to_string(t));
  }
  for (double w : mesh.chart_weight)
    if (!(w > 0)) rep.fail("nonpositive chart weight");

  auto edges = build_edge_map(mesh);
  std::set<EdgeKey> boundary_edges;
  for (const auto& [key, uses] : edges) {
    if (uses.size() > 2) {
      rep.fail("non-manifold edge");
    } else if (uses.size() == 2) {
      if (uses[0].forward == uses[1].forward) rep.fail("inconsistent orientation across an edge");
    } else {
      boundary_edges.insert(key);
    }
  }

  // boundary loops must partition the boundary edges
  std::set<EdgeKey> loop_edges;
  std::set<int> boundary_verts;
  for (const auto& loop : mesh.boundary_loops) {
    if (loop.size() < 3) rep.fail("boundary loop with fewer than 3 nodes");
    for (size_t i = 0; i < loop.size(); ++i) {
      int a = loop[i], b = loop[(i + 1) % loop.size()];
      if (!loop_edges.insert(edge_key(a, b)).second) rep.fail("duplicate edge in boundary loops");
      boundary_verts.insert(a);
    }
  }
  if (loop_edges != boundary_edges) rep.fail("boundary loops do not match boundary edges");

  // connectivity over the vertex graph
  std::vector<std::vector<int>> adj(nv);
  for (const auto& tri : mesh.triangles)
    for (int c = 0; c < 3; ++c) {
      adj[tri[c]].push_back(tri[(c + 1) % 3]);
      adj[tri[(c + 1) % 3]].push_back(tri[c]);
    }
  std::vector<char> visited(nv, 0);
  std::queue<int> q;
  q.push(mesh.triangles[0][0]);
  visited[mesh.triangles[0][0]] = 1;
  int count = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    ++count;
    for (int u : adj[v])
      if (!visited[u]) {
        visited[u] = 1;
        q.push(u);
      }
  }
  if (count != nv) rep.fail("mesh is not connected");

  for (const auto& cp : mesh.cone_points) {
    if (cp.order < 2) rep.fail("cone order < 2");
    if (cp.vertex < 0 || cp.vertex >= nv) {
      rep.fail("cone vertex out of range");
      continue;
    }
    if (boundary_verts.count(cp.vertex)) rep.fail("cone point on a boundary loop");
    double target = 2 * kPi / cp.order;
    double sum = vertex_angle_sum(mesh, cp.vertex);
    if (std::abs(sum - target) > angle_tol)
      rep.fail("cone angle sum off at vertex " + std::to_string(cp.vertex) + ": " +
               std::to_string(sum) + " vs " + std::to_string(target));
  }
  return rep;
}

void require_valid(const OrbiMesh& mesh, double angle_tol) {
  auto rep = check_mesh(mesh, angle_tol);
  if (!rep.ok) {
    std::ostringstream os;
    os << "invalid mesh:";
    for (const auto& f : rep.failures) os << "\n  " << f;
    throw std::runtime_error(os.str());
  }
}

// --- builders ---------------------------------------------------------------

OrbiMesh build_flat_torus(double side, double h) {
  if (!(side > 0)) throw std::invalid_argument("build_flat_torus: side must be positive");
  if (!(h > 0 && h < side / 4))
    throw std::invalid_argument("build_flat_torus: need 0 < h < side/4 to triangulate");
  const int n = static_cast<int>(std::ceil(side / h));
  const double hg = side / n;
  OrbiMesh mesh;
  mesh.vertices.resize(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mesh.vertices[static_cast<size_t>(i) * n + j] = Vec2(i * hg, j * hg);
  auto vid = [&](int i, int j) { return ((i % n + n) % n) * n + ((j % n + n) % n); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec2 c00(i * hg, j * hg), c10((i + 1) * hg, j * hg), c01(i * hg, (j + 1) * hg),
          c11((i + 1) * hg, (j + 1) * hg);
      int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      CornerCoords X1, X2;
      X1.col(0) = c00;
      X1.col(1) = c10;
      X1.col(2) = c11;
      X2.col(0) = c00;
      X2.col(1) = c11;
      X2.col(2) = c01;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.corners.push_back(X1);
      mesh.triangles.push_back({v00, v11, v01});
      mesh.corners.push_back(X2);
    }
  mesh.chart_weight.assign(mesh.triangles.size(), 1.0);
  return mesh;
}

OrbiMesh build_pillowcase(double side, double h, double grading) {
  if (!(side > 0)) throw std::invalid_argument("build_pillowcase: side must be positive");
  if (!(h > 0 && h < side / 4))
    throw std::invalid_argument("build_pillowcase: need 0 < h < side/4 to triangulate");
  if (!(grading > 0 && grading <= 1))
    throw std::invalid_argument("build_pillowcase: grading must be in (0,1]");
  int n = static_cast<int>(std::ceil(side / h));
  if (n % 2) ++n;
  const int rows = n / 2;
  const double hg = side / n;

  OrbiMesh mesh;
  // canonical vertex ids: bottom row i in [0,n/2], top row i in [0,n/2],
  // middle rows j in [1,rows-1] with i in [0,n)
  const int half = n / 2;
  auto bottom_id = [&](int i) {
    int ii = ((i % n) + n) % n;
    return std::min(ii, n - ii);
  };
  auto top_id = [&](int i) { return half + 1 + bottom_id(i); };
  auto mid_id = [&](int i, int j) {
    int ii = ((i % n) + n) % n;
    return 2 * (half + 1) + (j - 1) * n + ii;
  };
  auto vid = [&](int i, int j) {
    if (j == 0) return bottom_id(i);
    if (j == rows) return top_id(i);
    return mid_id(i, j);
  };
  mesh.vertices.resize(2 * (half + 1) + (rows - 1) * n);
  for (int i = 0; i <= half; ++i) {
    mesh.vertices[bottom_id(i)] = Vec2(i * hg, 0.0);
    mesh.vertices[top_id(i)] = Vec2(i * hg, rows * hg);
  }
  for (int j = 1; j < rows; ++j)
    for (int i = 0; i < n; ++i) mesh.vertices[mid_id(i, j)] = Vec2(i * hg, j * hg);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rows; ++j) {
      Vec2 c00(i * hg, j * hg), c10((i + 1) * hg, j * hg), c01(i * hg, (j + 1) * hg),
          c11((i + 1) * hg, (j + 1) * hg);
      int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      CornerCoords X1, X2;
      X1.col(0) = c00;
      X1.col(1) = c10;
      X1.col(2) = c11;
      X2.col(0) = c00;
      X2.col(1) = c11;
      X2.col(2) = c01;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.corners.push_back(X1);
      mesh.triangles.push_back({v00, v11, v01});
      mesh.corners.push_back(X2);
    }
  mesh.chart_weight.assign(mesh.triangles.size(), 1.0);
  mesh.cone_points = {{bottom_id(0), 2}, {bottom_id(half), 2}, {top_id(0), 2}, {top_id(half), 2}};
  if (grading < 1) {
    for (const auto& cp : std::vector<ConePoint>(mesh.cone_points))
      mesh = grade_toward(mesh, cp.vertex, grading);
  }
  return mesh;
}

OrbiMesh build_spindle(int m, double h) {
  if (m < 1) throw std::invalid_argument("build_spindle: m >= 1 required");
  if (!(h > 0 && h < 1)) throw std::invalid_argument("build_spindle: need 0 < h < 1");
  const double sector = 2 * kPi / m;
  const int nrings = std::max(4, static_cast<int>(std::lround(kPi / h)));
  const double dtheta = kPi / nrings;

  OrbiMesh mesh;
  const int north = 0;
  mesh.vertices.push_back(Vec2(0, 0));
  std::vector<std::vector<int>> ring_ids(nrings);  // rings 1..nrings-1
  std::vector<int> ring_count(nrings, 0);
  for (int j = 1; j < nrings; ++j) {
    double theta = j * dtheta;
    int cnt = std::max(3, static_cast<int>(std::lround(sector * std::sin(theta) / h)));
    ring_count[j] = cnt;
    ring_ids[j].resize(cnt);
    for (int i = 0; i < cnt; ++i) {
      double phi = sector * i / cnt;
      int id = mesh.n_vertices();
      ring_ids[j][i] = id;
      if (theta <= kPi / 2)
        mesh.vertices.push_back(theta * Vec2(std::cos(phi), std::sin(phi)));
      else
        mesh.vertices.push_back((kPi - theta) * Vec2(std::cos(-phi), std::sin(-phi)));
    }
  }
  const int south = mesh.n_vertices();
  mesh.vertices.push_back(Vec2(0, 0));

  auto north_node = [&](int j, int i_unwrapped) {
    int cnt = ring_count[j];
    int i = ((i_unwrapped % cnt) + cnt) % cnt;
    double theta = j * dtheta;
    double phi = sector * i_unwrapped / cnt;
    return RingNode{ring_ids[j][i], theta * Vec2(std::cos(phi), std::sin(phi)), phi,
                    Vec2(theta, phi)};
  };
  auto south_node = [&](int j, int i_unwrapped) {
    // CCW in the south chart (angle -phi ascending) runs through the ring
    // vertices in descending phi order
    int cnt = ring_count[j];
    int i = (((-i_unwrapped) % cnt) + cnt) % cnt;
    double theta = j * dtheta;
    double phi = -sector * i_unwrapped / cnt;  // unwrapped, matches vertex i mod the sector
    return RingNode{ring_ids[j][i], (kPi - theta) * Vec2(std::cos(-phi), std::sin(-phi)), -phi,
                    Vec2(theta, phi)};
  };

  bool with_sphere = true;
  // north fan
  {
    int cnt = ring_count[1];
    for (int i = 0; i < cnt; ++i) {
      RingNode a = north_node(1, i), b = north_node(1, i + 1);
      mesh.triangles.push_back({north, a.v, b.v});
      CornerCoords X, S;
      X.col(0) = Vec2(0, 0);
      X.col(1) = a.pos;
      X.col(2) = b.pos;
      S.col(0) = Vec2(0.0, a.sph.y());
      S.col(1) = a.sph;
      S.col(2) = b.sph;
      mesh.corners.push_back(X);
      mesh.corner_sphere.push_back(S);
    }
  }
  // bands
  for (int j = 1; j + 1 < nrings; ++j) {
    double theta_mid = (j + 0.5) * dtheta;
    std::vector<RingNode> outer, inner;
    if (theta_mid <= kPi / 2) {
      for (int i = 0; i <= ring_count[j + 1]; ++i) outer.push_back(north_node(j + 1, i));
      for (int i = 0; i <= ring_count[j]; ++i) inner.push_back(north_node(j, i));
    } else {
      for (int i = 0; i <= ring_count[j]; ++i) outer.push_back(south_node(j, i));
      for (int i = 0; i <= ring_count[j + 1]; ++i) inner.push_back(south_node(j + 1, i));
    }
    zipper(outer, inner, with_sphere, mesh.triangles, mesh.corners, mesh.corner_sphere);
  }
  // south fan
  {
    int cnt = ring_count[nrings - 1];
    for (int i = 0; i < cnt; ++i) {
      RingNode a = south_node(nrings - 1, i), b = south_node(nrings - 1, i + 1);
      mesh.triangles.push_back({south, a.v, b.v});
      CornerCoords X, S;
      X.col(0) = Vec2(0, 0);
      X.col(1) = a.pos;
      X.col(2) = b.pos;
      S.col(0) = Vec2(kPi, a.sph.y());
      S.col(1) = a.sph;
      S.col(2) = b.sph;
      mesh.corners.push_back(X);
      mesh.corner_sphere.push_back(S);
    }
  }
  mesh.chart_weight.assign(mesh.triangles.size(), 1.0);
  if (m >= 2) mesh.cone_points = {{north, m}, {south, m}};
  return mesh;
}

OrbiMesh build_disc(double radius, int k_boundary, double h) {
  if (!(radius > 0)) throw std::invalid_argument("build_disc: radius must be positive");
  if (k_boundary < 8) throw std::invalid_argument("build_disc: k_boundary >= 8 required");
  if (!(h > 0)) throw std::invalid_argument("build_disc: h must be positive");
  int nrings = std::max(1, static_cast<int>(std::lround(radius / h)));
  OrbiMesh mesh;
  mesh.vertices.push_back(Vec2(0, 0));
  std::vector<std::vector<int>> ring_ids(nrings + 1);
  std::vector<int> ring_count(nrings + 1, 0);
  for (int l = 1; l <= nrings; ++l) {
    double r = radius * l / nrings;
    int cnt = (l == nrings) ? k_boundary
                            : std::max(6, static_cast<int>(std::lround(k_boundary * double(l) / nrings)));
    ring_count[l] = cnt;
    ring_ids[l].resize(cnt);
    for (int i = 0; i < cnt; ++i) {
      double a = 2 * kPi * i / cnt;
      ring_ids[l][i] = mesh.n_vertices();
      mesh.vertices.push_back(r * Vec2(std::cos(a), std::sin(a)));
    }
  }
  auto node = [&](int l, int i_unwrapped) {
    int cnt = ring_count[l];
    int i = ((i_unwrapped % cnt) + cnt) % cnt;
    double a = 2 * kPi * i_unwrapped / cnt;
    double r = radius * l / nrings;
    return RingNode{ring_ids[l][i], r * Vec2(std::cos(a), std::sin(a)), a};
  };
  for (int i = 0; i < ring_count[1]; ++i) {
    RingNode a = node(1, i), b = node(1, i + 1);
    mesh.triangles.push_back({0, a.v, b.v});
    CornerCoords X;
    X.col(0) = Vec2(0, 0);
    X.col(1) = a.pos;
    X.col(2) = b.pos;
    mesh.corners.push_back(X);
  }
  for (int l = 1; l < nrings; ++l) {
    std::vector<RingNode> outer, inner;
    for (int i = 0; i <= ring_count[l + 1]; ++i) outer.push_back(node(l + 1, i));
    for (int i = 0; i <= ring_count[l]; ++i) inner.push_back(node(l, i));
    zipper(outer, inner, false, mesh.triangles, mesh.corners, mesh.corner_sphere);
  }
  mesh.chart_weight.assign(mesh.triangles.size(), 1.0);
  mesh.boundary_loops = trace_boundary_loops(mesh);
  return mesh;
}

// --- surgery ----------------------------------------------------------------

OrbiMesh refine(const OrbiMesh& mesh) {
  OrbiMesh out;
  out.vertices = mesh.vertices;
  out.cone_points = mesh.cone_points;
  std::map<EdgeKey, int> midpoint;
  auto midpoint_id = [&](int a, int b, const Vec2& pos) {
    auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(pos);
    midpoint.emplace(key, id);
    return id;
  };
  const bool sph = mesh.has_sphere_coords();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    const CornerCoords& X = mesh.corners[t];
    Vec2 p01 = 0.5 * (X.col(0) + X.col(1)), p12 = 0.5 * (X.col(1) + X.col(2)),
        p02 = 0.5 * (X.col(0) + X.col(2));
    int m01 = midpoint_id(T[0], T[1], p01);
    int m12 = midpoint_id(T[1], T[2], p12);
    int m02 = midpoint_id(T[0], T[2], p02);
    CornerCoords S, SM;
    if (sph) {
      S = mesh.corner_sphere[t];
      SM.col(0) = 0.5 * (S.col(0) + S.col(1));
      SM.col(1) = 0.5 * (S.col(1) + S.col(2));
      SM.col(2) = 0.5 * (S.col(0) + S.col(2));
    }
    double w = mesh.chart_weight.empty() ? 1.0 : mesh.chart_weight[t];
    auto push = [&](int a, int b, int c, Vec2 pa, Vec2 pb, Vec2 pc, Vec2 sa, Vec2 sb, Vec2 sc) {
      out.triangles.push_back({a, b, c});
      CornerCoords XC;
      XC.col(0) = pa;
      XC.col(1) = pb;
      XC.col(2) = pc;
      out.corners.push_back(XC);
      if (sph) {
        CornerCoords SC;
        SC.col(0) = sa;
        SC.col(1) = sb;
        SC.col(2) = sc;
        out.corner_sphere.push_back(SC);
      }
      out.chart_weight.push_back(w);
    };
    Vec2 z(0, 0);
    push(T[0], m01, m02, X.col(0), p01, p02, sph ? Vec2(S.col(0)) : z, sph ? Vec2(SM.col(0)) : z,
         sph ? Vec2(SM.col(2)) : z);
    push(m01, T[1], m12, p01, X.col(1), p12, sph ? Vec2(SM.col(0)) : z, sph ? Vec2(S.col(1)) : z,
         sph ? Vec2(SM.col(1)) : z);
    push(m02, m12, T[2], p02, p12, X.col(2), sph ? Vec2(SM.col(2)) : z, sph ? Vec2(SM.col(1)) : z,
         sph ? Vec2(S.col(2)) : z);
    push(m01, m12, m02, p01, p12, p02, sph ? Vec2(SM.col(0)) : z, sph ? Vec2(SM.col(1)) : z,
         sph ? Vec2(SM.col(2)) : z);
  }
  out.boundary_loops = trace_boundary_loops(out);
  return out;
}

namespace {

// Split a set of edges, each at a per-edge parameter measured from the
// lower-indexed endpoint. Conforming: both incident triangles split.
OrbiMesh split_edges(const OrbiMesh& mesh, const std::map<EdgeKey, double>& params) {
  OrbiMesh out;
  out.vertices = mesh.vertices;
  out.cone_points = mesh.cone_points;
  std::map<EdgeKey, int> new_vertex;
  const bool sph = mesh.has_sphere_coords();

  // create vertices with representative positions from the first triangle seen
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    const CornerCoords& X = mesh.corners[t];
    for (int c = 0; c < 3; ++c) {
      int a = T[c], b = T[(c + 1) % 3];
      auto key = edge_key(a, b);
      auto pit = params.find(key);
      if (pit == params.end() || new_vertex.count(key)) continue;
      double s = pit->second;  // from key.first
      Vec2 pa = X.col(c), pb = X.col((c + 1) % 3);
      Vec2 pos = (a == key.first) ? (1 - s) * pa + s * pb : (1 - s) * pb + s * pa;
      int id = static_cast<int>(out.vertices.size());
      out.vertices.push_back(pos);
      new_vertex.emplace(key, id);
    }
  }

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    const CornerCoords& X = mesh.corners[t];
    CornerCoords S;
    if (sph) S = mesh.corner_sphere[t];
    double w = mesh.chart_weight.empty() ? 1.0 : mesh.chart_weight[t];

    struct P {
      int v;
      Vec2 pos;
      Vec2 sph;
    };
    // polygon: corners plus split points along edges, CCW
    std::vector<P> poly;
    for (int c = 0; c < 3; ++c) {
      int a = T[c], b = T[(c + 1) % 3];
      poly.push_back({a, X.col(c), sph ? Vec2(S.col(c)) : Vec2(0, 0)});
      auto key = edge_key(a, b);
      auto pit = params.find(key);
      if (pit != params.end()) {
        double s = pit->second;
        double sa = (a == key.first) ? s : 1 - s;  // parameter from a
        Vec2 pos = (1 - sa) * X.col(c) + sa * X.col((c + 1) % 3);
        Vec2 sphc = sph ? Vec2((1 - sa) * S.col(c) + sa * S.col((c + 1) % 3)) : Vec2(0, 0);
        poly.push_back({new_vertex.at(key), pos, sphc});
      }
    }
    auto push = [&](const P& a, const P& b, const P& c) {
      out.triangles.push_back({a.v, b.v, c.v});
      CornerCoords XC;
      XC.col(0) = a.pos;
      XC.col(1) = b.pos;
      XC.col(2) = c.pos;
      out.corners.push_back(XC);
      if (sph) {
        CornerCoords SC;
        SC.col(0) = a.sph;
        SC.col(1) = b.sph;
        SC.col(2) = c.sph;
        out.corner_sphere.push_back(SC);
      }
      out.chart_weight.push_back(w);
    };
    // fan-triangulate the polygon from the best corner: choose the original
    // corner adjacent to the most split edges to keep quality
    if (poly.size() == 3) {
      push(poly[0], poly[1], poly[2]);
    } else {
      // find an original corner whose two adjacent polygon edges are both
      // sub-edges of split edges when possible (i.e. opposite edge split)
      int start = 0;
      for (size_t i = 0; i < poly.size(); ++i) {
        // prefer a split vertex as the fan apex: it sees the polygon convexly
        bool is_new = true;
        for (int c = 0; c < 3; ++c)
          if (poly[i].v == T[c]) is_new = false;
        if (is_new) {
          start = static_cast<int>(i);
          break;
        }
      }
      for (size_t i = 1; i + 1 < poly.size(); ++i)
        push(poly[start], poly[(start + i) % poly.size()], poly[(start + i + 1) % poly.size()]);
    }
  }
  out.boundary_loops = trace_boundary_loops(out);
  return out;
}

double chart_edge_length(const OrbiMesh& mesh, int t, int c) {
  const CornerCoords& X = mesh.corners[t];
  return (X.col((c + 1) % 3) - X.col(c)).norm();
}

}  // namespace

OrbiMesh grade_toward(const OrbiMesh& mesh, int vertex, double ratio) {
  if (vertex < 0 || vertex >= mesh.n_vertices())
    throw std::invalid_argument("grade_toward: vertex out of range");
  if (!(ratio > 0 && ratio < 1)) throw std::invalid_argument("grade_toward: ratio must be in (0,1)");
  // shortest incident edge
  double dmin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    for (int c = 0; c < 3; ++c)
      if (T[c] == vertex) {
        dmin = std::min(dmin, chart_edge_length(mesh, t, c));
        dmin = std::min(dmin, chart_edge_length(mesh, t, (c + 2) % 3));
      }
  }
  if (!std::isfinite(dmin)) throw std::invalid_argument("grade_toward: isolated vertex");
  const double d = ratio * dmin;
  // split every incident edge at metric distance d from `vertex`
  std::map<EdgeKey, double> params;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    for (int c = 0; c < 3; ++c) {
      int a = T[c], b = T[(c + 1) % 3];
      if (a != vertex && b != vertex) continue;
      auto key = edge_key(a, b);
      if (params.count(key)) continue;
      double len = chart_edge_length(mesh, t, c);
      double from_v = d / len;
      params[key] = (key.first == vertex) ? from_v : 1 - from_v;
    }
  }
  return split_edges(mesh, params);
}

OrbiMesh split_fan(const OrbiMesh& mesh, int vertex) {
  std::map<EdgeKey, double> params;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    for (int c = 0; c < 3; ++c)
      if (T[c] == vertex) {
        // base edge is the one opposite the apex
        int a = T[(c + 1) % 3], b = T[(c + 2) % 3];
        params[edge_key(a, b)] = 0.5;
      }
  }
  if (params.empty()) throw std::invalid_argument("split_fan: isolated vertex");
  return split_edges(mesh, params);
}

ExciseResult excise_ball(const OrbiMesh& mesh, int center, double r, int k_boundary) {
  if (center < 0 || center >= mesh.n_vertices())
    throw std::invalid_argument("excise_ball: center out of range");
  if (!(r > 0)) throw std::invalid_argument("excise_ball: radius must be positive");
  if (k_boundary < 8) throw std::invalid_argument("excise_ball: k_boundary >= 8 required");
  const Vec2 p = mesh.vertices[center];

  // cone points and existing boundary must stay clear of the ball
  for (const auto& cp : mesh.cone_points)
    if (mesh.chart_distance(cp.vertex, p) < 1.2 * r)
      throw std::invalid_argument("excise_ball: ball overlaps a cone point");
  for (const auto& loop : mesh.boundary_loops)
    for (int v : loop)
      if (mesh.chart_distance(v, p) < 1.2 * r)
        throw std::invalid_argument("excise_ball: ball overlaps the boundary");

  // hole vertices sit at least half a ring spacing outside the circle so
  // the annulus strip has workable aspect ratios
  const double rcut = r * (1 + kPi / k_boundary + 1e-6);
  std::vector<char> removed(mesh.n_triangles(), 0);
  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (triangle_distance(mesh, t, p) < rcut) removed[t] = 1;

  // hole-polygon chords must clear the circle, or the annulus strip would
  // fold; expand the removal until they do
  {
    auto seg_dist = [&](const Vec2& a, const Vec2& b) {
      Vec2 ab = b - a;
      double len2 = ab.squaredNorm();
      double s = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      return (a + s * ab - p).norm();
    };
    for (int pass = 0; pass < 64; ++pass) {
      bool changed = false;
      auto edges = build_edge_map(mesh);
      for (const auto& [key, uses] : edges) {
        if (uses.size() != 2) continue;
        int t0 = uses[0].tri, t1 = uses[1].tri;
        if (removed[t0] == removed[t1]) continue;
        int kept = removed[t0] ? t1 : t0;
        const auto& u = removed[t0] ? uses[1] : uses[0];
        Vec2 a = mesh.corners[u.tri].col(u.local);
        Vec2 b = mesh.corners[u.tri].col((u.local + 1) % 3);
        if (seg_dist(a, b) <= r * (1 + 1e-9)) {
          removed[kept] = 1;
          changed = true;
        }
      }
      if (!changed) break;
    }
  }

  // chart coherence over the removed region: every vertex of a removed
  // triangle must have consistent corner coordinates
  {
    std::map<int, Vec2> seen;
    double scale = std::max(1.0, r);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      if (!removed[t]) continue;
      for (int c = 0; c < 3; ++c) {
        int v = mesh.triangles[t][c];
        Vec2 pos = mesh.corners[t].col(c);
        auto [it, inserted] = seen.emplace(v, pos);
        if (!inserted && (it->second - pos).norm() > 1e-9 * scale)
          throw std::invalid_argument(
              "excise_ball: excision region crosses a chart seam; move the center or refine");
      }
    }
  }

  // hole polygon: edges between removed and kept triangles, directed so the
  // cycle runs CCW around p
  std::map<EdgeKey, std::pair<int, int>> kept_dir;   // directed edge in the kept triangle
  std::map<EdgeKey, std::pair<int, int>> kept_edge;  // (triangle, local edge)
  {
    auto edges = build_edge_map(mesh);
    for (const auto& [key, uses] : edges) {
      int nrm = 0, nkeep = 0;
      for (const auto& u : uses) (removed[u.tri] ? nrm : nkeep)++;
      if (nrm > 0 && nkeep == 0 && uses.size() == 1)
        throw std::invalid_argument("excise_ball: ball reaches the mesh boundary");
      if (nrm == 1 && nkeep == 1) {
        for (const auto& u : uses) {
          if (removed[u.tri]) continue;
          const auto& T = mesh.triangles[u.tri];
          kept_dir[key] = {T[u.local], T[(u.local + 1) % 3]};
          kept_edge[key] = {u.tri, u.local};
        }
      }
    }
  }
  if (kept_dir.empty()) throw std::invalid_argument("excise_ball: nothing to excise");
  // kept-side directed edges run CW around the hole; reverse for CCW
  std::map<int, int> next;
  for (const auto& [key, dir] : kept_dir) next[dir.second] = dir.first;
  std::vector<int> hole;
  {
    int start = next.begin()->first, v = start;
    do {
      hole.push_back(v);
      auto it = next.find(v);
      if (it == next.end()) throw std::invalid_argument("excise_ball: hole boundary is not a cycle");
      v = it->second;
    } while (v != start && hole.size() <= next.size() + 1);
    if (v != start || hole.size() != next.size())
      throw std::invalid_argument("excise_ball: hole boundary is not a single cycle; refine first");
  }

  // positions of hole vertices in the local chart (from any removed triangle)
  std::map<int, Vec2> hole_pos;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (!removed[t]) continue;
    for (int c = 0; c < 3; ++c) hole_pos[mesh.triangles[t][c]] = mesh.corners[t].col(c);
  }
  // the kept side of every hole edge must agree with the removed-side chart,
  // or the strip would be glued to the wrong realization
  for (const auto& [key, tl] : kept_edge) {
    const auto& T = mesh.triangles[tl.first];
    const CornerCoords& X = mesh.corners[tl.first];
    int a = T[tl.second], b = T[(tl.second + 1) % 3];
    double scale = std::max(1.0, r);
    if ((X.col(tl.second) - hole_pos.at(a)).norm() > 1e-9 * scale ||
        (X.col((tl.second + 1) % 3) - hole_pos.at(b)).norm() > 1e-9 * scale)
      throw std::invalid_argument(
          "excise_ball: excision region crosses a chart seam; move the center or refine");
  }
  // star-shapedness: angles strictly increasing along the CCW cycle
  std::vector<double> hole_angle(hole.size());
  for (size_t i = 0; i < hole.size(); ++i) {
    Vec2 d = hole_pos.at(hole[i]) - p;
    if (d.norm() < rcut)
      throw std::invalid_argument("excise_ball: hole polygon touches the disc; refine first");
    hole_angle[i] = std::atan2(d.y(), d.x());
  }
  std::vector<double> unwrapped(hole.size() + 1);
  unwrapped[0] = hole_angle[0];
  for (size_t i = 1; i <= hole.size(); ++i) {
    double a = (i < hole.size()) ? hole_angle[i] : hole_angle[0];
    double prev = unwrapped[i - 1];
    while (a <= prev) a += 2 * kPi;
    if (a - prev >= kPi)
      throw std::invalid_argument("excise_ball: hole polygon is not star-shaped; refine first");
    unwrapped[i] = a;
  }
  if (std::abs(unwrapped[hole.size()] - unwrapped[0] - 2 * kPi) > 1e-9)
    throw std::invalid_argument("excise_ball: hole polygon does not wind once around the center");

  // sphere-coordinate interpolation for new ring nodes, if needed
  const bool sph = mesh.has_sphere_coords();
  auto interp_sphere = [&](const Vec2& q) -> Vec2 {
    double best = std::numeric_limits<double>::infinity();
    Vec2 val(0, 0);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      if (!removed[t]) continue;
      const CornerCoords& X = mesh.corners[t];
      Eigen::Matrix2d E;
      E.col(0) = X.col(1) - X.col(0);
      E.col(1) = X.col(2) - X.col(0);
      Vec2 lam = E.inverse() * (q - X.col(0));
      double out_by = std::max({-lam.x(), -lam.y(), lam.x() + lam.y() - 1.0, 0.0});
      if (out_by < best) {
        best = out_by;
        const CornerCoords& S = mesh.corner_sphere[t];
        val = (1 - lam.x() - lam.y()) * S.col(0).eval() + lam.x() * S.col(1).eval() +
              lam.y() * S.col(2).eval();
      }
    }
    return val;
  };

  // rebuild
  ExciseResult res;
  res.center = p;
  std::vector<char> vertex_kept(mesh.n_vertices(), 0);
  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (!removed[t])
      for (int c = 0; c < 3; ++c) vertex_kept[mesh.triangles[t][c]] = 1;
  res.old_to_new.assign(mesh.n_vertices(), -1);
  OrbiMesh& out = res.mesh;
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (vertex_kept[v]) {
      res.old_to_new[v] = out.n_vertices();
      out.vertices.push_back(mesh.vertices[v]);
    }
  for (const auto& cp : mesh.cone_points)
    out.cone_points.push_back({res.old_to_new[cp.vertex], cp.order});
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (removed[t]) continue;
    const auto& T = mesh.triangles[t];
    out.triangles.push_back(
        {res.old_to_new[T[0]], res.old_to_new[T[1]], res.old_to_new[T[2]]});
    out.corners.push_back(mesh.corners[t]);
    if (sph) out.corner_sphere.push_back(mesh.corner_sphere[t]);
    out.chart_weight.push_back(mesh.chart_weight.empty() ? 1.0 : mesh.chart_weight[t]);
  }

  std::vector<RingNode> ring_nodes;
  for (int i = 0; i < k_boundary; ++i) {
    double a = 2 * kPi * i / k_boundary;
    Vec2 pos = p + r * Vec2(std::cos(a), std::sin(a));
    int id = out.n_vertices();
    out.vertices.push_back(pos);
    res.ring.push_back(id);
    RingNode node{id, pos, a};
    if (sph) node.sph = interp_sphere(pos);
    ring_nodes.push_back(node);
  }

  // outer ring: hole polygon rotated so its unwrapped angles start in
  // [ring start - 2pi, ring start + ...); zipper handles offsets fine as
  // long as both start near each other
  std::vector<RingNode> outer;
  {
    // rotate so unwrapped angle of first node is >= 0 and minimal
    size_t best = 0;
    double bestval = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < hole.size(); ++i) {
      double a = std::fmod(unwrapped[i], 2 * kPi);
      if (a < 0) a += 2 * kPi;
      if (a < bestval) {
        bestval = a;
        best = i;
      }
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (size_t s = 0; s <= hole.size(); ++s) {
      size_t i = (best + s) % hole.size();
      int v = hole[i];
      double a = std::fmod(unwrapped[i], 2 * kPi);
      if (a < 0) a += 2 * kPi;
      if (s == 0) {
        prev = a;
      } else {
        while (a <= prev) a += 2 * kPi;
        prev = a;
      }
      RingNode node{res.old_to_new[v], hole_pos.at(v), a};
      if (sph) {
        // reuse the kept triangle's sphere coords
        node.sph = interp_sphere(hole_pos.at(v));
      }
      outer.push_back(node);
    }
  }
  auto inner = close_ring(ring_nodes, 2 * kPi);
  // align inner start index to outer start angle
  {
    double a0 = outer.front().angle;
    size_t j0 = 0;
    while (j0 + 1 < inner.size() - 1 && inner[j0 + 1].angle <= a0) ++j0;
    std::vector<RingNode> rot;
    for (size_t s = 0; s <= ring_nodes.size(); ++s) {
      RingNode n = ring_nodes[(j0 + s) % ring_nodes.size()];
      n.angle = 2 * kPi * (j0 + s) / ring_nodes.size();
      if (sph) n.sph = ring_nodes[(j0 + s) % ring_nodes.size()].sph;
      rot.push_back(n);
    }
    inner = rot;
  }
  size_t before = out.triangles.size();
  zipper(outer, inner, sph, out.triangles, out.corners, out.corner_sphere);
  for (size_t t = before; t < out.triangles.size(); ++t) {
    out.chart_weight.push_back(1.0);
  }
  out.boundary_loops = trace_boundary_loops(out);
  for (size_t t = before; t < out.triangles.size(); ++t)
    if (out.chart_area(static_cast<int>(t)) <= 0) {
      std::ostringstream os;
      os << "excise_ball: degenerate annulus triangle; refine first [area="
         << out.chart_area(static_cast<int>(t));
      for (int c = 0; c < 3; ++c) {
        Vec2 q = out.corners[t].col(c) - p;
        os << " (r=" << q.norm() << ",a=" << std::atan2(q.y(), q.x()) << ")";
      }
      os << "]";
      throw std::invalid_argument(os.str());
    }
  return res;
}

OrbiMesh resolve_disc(const OrbiMesh& mesh, int center, double r, int k_boundary, double ratio) {
  if (!(ratio > 0 && ratio < 1)) throw std::invalid_argument("resolve_disc: ratio in (0,1)");
  OrbiMesh cur = mesh;
  int cur_center = center;
  const double target = 2 * kPi * r / k_boundary * 1.25;
  for (int pass = 0; pass < 64; ++pass) {
    const Vec2 p = cur.vertices[cur_center];
    std::map<EdgeKey, double> params;
    for (int t = 0; t < cur.n_triangles(); ++t) {
      double d = triangle_distance(cur, t, p);
      if (d > 1.6 * r) continue;
      // radius-proportional target: tight at the circle, relaxed outward
      double allowed = target * std::max(1.0, 1.25 * d / r);
      int cbest = 0;
      double lbest = 0;
      for (int c = 0; c < 3; ++c) {
        double l = chart_edge_length(cur, t, c);
        if (l > lbest) {
          lbest = l;
          cbest = c;
        }
      }
      if (lbest > allowed) {
        const auto& T = cur.triangles[t];
        params[edge_key(T[cbest], T[(cbest + 1) % 3])] = 0.5;
      }
    }
    if (params.empty()) break;
    cur = split_edges(cur, params);
    // vertex ids are stable for original vertices in split_edges
  }
  return cur;
}

ReplaceDiscResult replace_disc(const OrbiMesh& mesh, int center, double R, int k_boundary,
                               double ratio, double inner_target) {
  if (mesh.has_sphere_coords())
    throw std::invalid_argument("replace_disc: flat charts only");
  if (!(ratio > 0.5 && ratio < 1)) throw std::invalid_argument("replace_disc: ratio in (0.5,1)");
  if (!(inner_target > 0 && inner_target < R))
    throw std::invalid_argument("replace_disc: need 0 < inner_target < R");
  ExciseResult ex = excise_ball(mesh, center, R, k_boundary);
  const Vec2 p = ex.center;
  ReplaceDiscResult res;
  res.old_to_new = ex.old_to_new;
  OrbiMesh& out = res.mesh;
  out = std::move(ex.mesh);

  // concentric rings R, R*ratio, R*ratio^2, ... down to the inner target,
  // all with k nodes at the excision-circle phases, closed by a center fan
  std::vector<double> radii{R};
  while (radii.back() * ratio > 1.6 * inner_target) radii.push_back(radii.back() * ratio);
  std::vector<std::vector<int>> ring_ids(radii.size());
  ring_ids[0] = ex.ring;
  for (size_t j = 1; j < radii.size(); ++j) {
    ring_ids[j].resize(k_boundary);
    for (int i = 0; i < k_boundary; ++i) {
      double a = 2 * kPi * i / k_boundary;
      ring_ids[j][i] = out.n_vertices();
      out.vertices.push_back(p + radii[j] * Vec2(std::cos(a), std::sin(a)));
    }
  }
  res.center = out.n_vertices();
  out.vertices.push_back(p);

  auto node = [&](size_t j, int i_unwrapped) {
    int i = ((i_unwrapped % k_boundary) + k_boundary) % k_boundary;
    double a = 2 * kPi * i_unwrapped / k_boundary;
    return RingNode{ring_ids[j][i], p + radii[j] * Vec2(std::cos(a), std::sin(a)), a};
  };
  size_t before = out.triangles.size();
  for (size_t j = 0; j + 1 < radii.size(); ++j) {
    std::vector<RingNode> outer, inner;
    for (int i = 0; i <= k_boundary; ++i) {
      outer.push_back(node(j, i));
      inner.push_back(node(j + 1, i));
    }
    zipper(outer, inner, false, out.triangles, out.corners, out.corner_sphere);
  }
  for (int i = 0; i < k_boundary; ++i) {
    RingNode a = node(radii.size() - 1, i), b = node(radii.size() - 1, i + 1);
    out.triangles.push_back({res.center, a.v, b.v});
    CornerCoords X;
    X.col(0) = p;
    X.col(1) = a.pos;
    X.col(2) = b.pos;
    out.corners.push_back(X);
  }
  for (size_t t = before; t < out.triangles.size(); ++t) out.chart_weight.push_back(1.0);
  out.boundary_loops = trace_boundary_loops(out);
  return res;
}

int nearest_vertex(const OrbiMesh& mesh, const Vec2& p) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    double d = (mesh.vertices[v] - p).norm();
    if (d < bd) {
      bd = d;
      best = v;
    }
  }
  return best;
}

double polygon_disc_area(double r, int k) { return 0.5 * k * r * r * std::sin(2 * kPi / k); }

double polygon_circle_length(double r, int k) { return 2.0 * k * r * std::sin(kPi / k); }

}  // namespace orbi
