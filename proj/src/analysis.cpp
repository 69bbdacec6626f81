#include "orbispec/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace orbi {

namespace {
constexpr double kPi = std::numbers::pi;
}

double chi(double epsilon, double r) {
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("chi: epsilon must be in (0,1)");
  if (r < 0) throw std::invalid_argument("chi: r must be nonnegative");
  double root = std::sqrt(epsilon);
  if (r <= epsilon) return 0.0;
  if (r >= root) return 1.0;
  return -(2.0 / std::log(epsilon)) * std::log(r / epsilon);
}

double grad_chi_norm_sq_closed_form(double epsilon, int n, int group_order) {
  if (!(epsilon > 0 && epsilon < 1))
    throw std::invalid_argument("grad_chi_norm_sq_closed_form: epsilon must be in (0,1)");
  if (n < 2) throw std::invalid_argument("grad_chi_norm_sq_closed_form: n >= 2");
  if (group_order < 1)
    throw std::invalid_argument("grad_chi_norm_sq_closed_form: group order >= 1");
  const double leps = std::log(epsilon);
  if (n == 2) return 4.0 * kPi / (group_order * std::abs(leps));
  // 4 Vol(S^{n-1}) / (|G| (ln eps)^2) * int_eps^sqrt(eps) r^{n-3} dr
  const double vol_sphere = 2.0 * std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0);
  const double integral =
      (std::pow(epsilon, (n - 2) / 2.0) - std::pow(epsilon, double(n - 2))) / (n - 2);
  return 4.0 * vol_sphere / (group_order * leps * leps) * integral;
}

BoundReport delta_bound(const OrbiMesh& o1, const AssembledSystem& sys, const Vec2& p1_pos,
                        double epsilon, double lambda_k_ref) {
  if (!(epsilon > 0 && epsilon < 1))
    throw std::invalid_argument("delta_bound: epsilon must be in (0,1)");
  if (sys.n != o1.n_vertices()) throw std::invalid_argument("delta_bound: system/mesh mismatch");

  // resolution: the eps-disc must be finer than eps/2 and the logarithmic
  // ramp [eps, sqrt(eps)] finer than half its local radius
  {
    const double root = std::sqrt(epsilon);
    double hdisc = 0;
    bool any = false;
    bool ramp_ok = true;
    for (int t = 0; t < o1.n_triangles(); ++t) {
      const CornerCoords& X = o1.corners[t];
      double dmin = std::min({(X.col(0) - p1_pos).norm(), (X.col(1) - p1_pos).norm(),
                              (X.col(2) - p1_pos).norm()});
      double h = 0;
      for (int c = 0; c < 3; ++c)
        h = std::max(h, (X.col((c + 1) % 3) - X.col(c)).norm());
      if (dmin <= epsilon) {
        any = true;
        hdisc = std::max(hdisc, h);
      }
      if (dmin <= root && h > 0.5 * std::max(epsilon, dmin)) ramp_ok = false;
    }
    if (!any || hdisc > epsilon / 2 || !ramp_ok)
      throw std::invalid_argument(
          "delta_bound: mesh does not resolve radius eps at p1; refine near the center");
  }

  Eigen::VectorXd x(o1.n_vertices());
  for (int v = 0; v < o1.n_vertices(); ++v) x[v] = chi(epsilon, o1.chart_distance(v, p1_pos));

  BoundReport rep;
  rep.epsilon = epsilon;
  rep.lambda_k_ref = lambda_k_ref;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(o1.n_vertices()) - x.cwiseProduct(x);
  rep.term_l2 = std::sqrt(w.dot(sys.M * w));
  Eigen::VectorXd xm = x - Eigen::VectorXd::Ones(o1.n_vertices());
  rep.chi_dirichlet = sys.k_energy(x);
  double q2 = sys.k_energy(xm) + xm.dot(sys.M * xm);
  rep.term_qnorm = std::sqrt(q2);
  rep.term_qnorm_sq = q2;
  rep.delta_value =
      2.0 * (1.0 + lambda_k_ref) * (rep.term_l2 + 2.0 * rep.term_qnorm + rep.term_qnorm_sq);
  return rep;
}

TransplantReport transplant_upper_bound(const SpectrumResult& o1_modes, const OrbiMesh& o1,
                                        const std::vector<int>& o1_to_mesh1,
                                        const GluedComplex& gc, const AssembledSystem& glued_sys,
                                        const BoundReport& bound) {
  const int count = static_cast<int>(o1_modes.eigenvalues.size());
  TransplantReport rep;
  Eigen::MatrixXd U(glued_sys.n, count);
  U.setZero();
  for (int v = 0; v < o1.n_vertices(); ++v) {
    int m1 = o1_to_mesh1[v];
    if (m1 < 0) continue;  // vertex inside the excised ball
    double c = chi(bound.epsilon, o1.chart_distance(v, gc.p1_chart));
    int dof = gc.dof1[m1];
    for (int j = 0; j < count; ++j) U(dof, j) = c * o1_modes.eigenvectors(v, j);
  }
  for (int j = 0; j < count; ++j) {
    rep.quotients.push_back(rayleigh(glued_sys, U.col(j)));
    rep.bounds.push_back(o1_modes.eigenvalues[j] + bound.delta_value);
  }
  // M-normalized Gram
  Eigen::MatrixXd MU = glued_sys.M * U;
  Eigen::MatrixXd G = U.transpose() * MU;
  Eigen::VectorXd d = G.diagonal().cwiseSqrt();
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) G(i, j) /= d[i] * d[j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  rep.min_gram_singular = svd.singularValues().minCoeff();
  rep.max_gram_deviation = (G - Eigen::MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff();
  if (rep.min_gram_singular <= 1e-6)
    throw std::runtime_error(
        "transplant_upper_bound: transplanted set numerically dependent at this epsilon");
  return rep;
}

HarmonicExtensionResult harmonic_extension(double radius, int k_boundary, double h,
                                           const Eigen::VectorXd& ring_values) {
  if (ring_values.size() != k_boundary)
    throw std::invalid_argument("harmonic_extension: one value per boundary node required");
  HarmonicExtensionResult res;
  res.disc = build_disc(radius, k_boundary, h);
  AssembledSystem sys = assemble(res.disc, euclidean(res.disc));
  if (res.disc.boundary_loops.size() != 1)
    throw std::runtime_error("harmonic_extension: disc must have one boundary loop");
  const auto& loop = res.disc.boundary_loops[0];

  // boundary nodes sit at angles 2*pi*i/k; map loop nodes to data slots
  std::vector<int> slot_of_vertex(res.disc.n_vertices(), -1);
  for (int v : loop) {
    Vec2 p = res.disc.vertices[v];
    double a = std::atan2(p.y(), p.x());
    int slot = static_cast<int>(std::llround(a / (2 * kPi / k_boundary)));
    slot = ((slot % k_boundary) + k_boundary) % k_boundary;
    slot_of_vertex[v] = slot;
  }

  const int n = res.disc.n_vertices();
  std::vector<int> interior;
  for (int v = 0; v < n; ++v)
    if (slot_of_vertex[v] < 0) interior.push_back(v);
  std::vector<int> pos(n, -1);
  for (size_t i = 0; i < interior.size(); ++i) pos[interior[i]] = static_cast<int>(i);

  Eigen::VectorXd full(n);
  for (int v = 0; v < n; ++v) full[v] = slot_of_vertex[v] >= 0 ? ring_values[slot_of_vertex[v]] : 0.0;

  // K_II u_I = -K_IB u_B
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(interior.size());
  for (int col = 0; col < sys.K.outerSize(); ++col)
    for (SpMat::InnerIterator it(sys.K, col); it; ++it) {
      int i = static_cast<int>(it.row()), j = col;
      if (pos[i] < 0) continue;
      if (pos[j] >= 0)
        trip.emplace_back(pos[i], pos[j], it.value());
      else
        rhs[pos[i]] -= it.value() * full[j];
    }
  if (!interior.empty()) {
    SpMat Kii(interior.size(), interior.size());
    Kii.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(Kii);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("harmonic_extension: singular stiffness on the ball mesh");
    Eigen::VectorXd ui = ldlt.solve(rhs);
    for (size_t i = 0; i < interior.size(); ++i) full[interior[i]] = ui[i];
  }
  res.values = full;
  res.dirichlet_energy = full.dot(sys.K * full);
  res.h1_norm = std::sqrt(res.dirichlet_energy + full.dot(sys.M * full));
  return res;
}

std::vector<double> trace_values(const GluedComplex& gc, const SpectrumResult& spec, int k) {
  SpMat B = boundary_mass(gc.mesh1, gc.g1, gc.ring_loop1);
  const int count = std::min<int>(k + 1, spec.eigenvalues.size());
  std::vector<double> raw(count);
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXd u1 = gc.restrict1(spec.eigenvectors.col(j));
    raw[j] = u1.dot(B * u1);
  }
  // average within clusters so the value does not depend on the basis
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j) {
    int cid = spec.clusters[j];
    double sum = 0;
    int sz = 0;
    for (int i = 0; i < count; ++i)
      if (spec.clusters[i] == cid) {
        sum += raw[i];
        ++sz;
      }
    out[j] = std::sqrt(gc.epsilon) * std::sqrt(sum / sz);
  }
  return out;
}

ScalingCheckReport scaling_identity_check(const OrbiMesh& mesh, const MetricField& field,
                                          double epsilon, int n_samples, std::uint64_t seed) {
  if (!(epsilon > 0)) throw std::invalid_argument("scaling_identity_check: epsilon > 0");
  AssembledSystem base = assemble(mesh, field);
  AssembledSystem scaled = assemble(mesh, scale(field, epsilon * epsilon));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ScalingCheckReport rep;
  const double e2 = epsilon * epsilon;
  for (int s = 0; s < n_samples; ++s) {
    Eigen::VectorXd u(mesh.n_vertices());
    for (int i = 0; i < u.size(); ++i) u[i] = gauss(rng);
    double m1 = u.dot(base.M * u), m2 = u.dot(scaled.M * u);
    double k1 = u.dot(base.K * u), k2 = u.dot(scaled.K * u);
    rep.mass_max_rel_dev = std::max(rep.mass_max_rel_dev, std::abs(m2 - e2 * m1) / (e2 * m1));
    rep.stiffness_max_rel_dev = std::max(rep.stiffness_max_rel_dev, std::abs(k2 - k1) / k1);
  }
  return rep;
}

ContinuityCheckReport continuity_check(const AssembledSystem& a, const AssembledSystem& b,
                                       double delta, int k, const SolveOptions& opts) {
  SpectrumResult sa = solve_smallest(a, k, opts);
  SpectrumResult sb = solve_smallest(b, k, opts);
  ContinuityCheckReport rep;
  rep.delta = delta;
  const double lo = std::exp(-3.0 * delta), hi = std::exp(3.0 * delta);
  for (int j = 0; j <= k; ++j) {
    if (sb.eigenvalues[j] <= 1e-8) continue;
    double ratio = sa.eigenvalues[j] / sb.eigenvalues[j];
    rep.ratios.push_back(ratio);
    rep.worst_low = std::min(rep.worst_low, ratio);
    rep.worst_high = std::max(rep.worst_high, ratio);
    if (ratio < lo || ratio > hi) rep.inside_envelope = false;
  }
  return rep;
}

namespace {

SweepRecord sweep_entry(const CollapseSetup& setup, const SpectrumResult& ref, double eps) {
  ConnectedSumConfig cfg;
  cfg.epsilon = eps;
  cfg.p1 = setup.p1;
  cfg.p2 = setup.p2;
  cfg.k_boundary = setup.k_boundary;
  ConnectedSumInput i1{setup.o1, setup.g1};
  ConnectedSumInput i2{setup.o2, setup.g2};
  GluedComplex gc = build_connected_sum(i1, i2, cfg);
  AssembledSystem sys = assemble_glued(gc);
  SpectrumResult spec = solve_smallest(sys, setup.k, setup.solve);

  SweepRecord rec;
  rec.epsilon = eps;
  rec.dofs = gc.n_dofs;
  rec.solver_converged = spec.converged;
  for (int j = 0; j <= setup.k; ++j) {
    rec.lambda_glued.push_back(spec.eigenvalues[j]);
    rec.lambda_ref.push_back(ref.eigenvalues[j]);
    rec.gaps.push_back(std::abs(spec.eigenvalues[j] - ref.eigenvalues[j]));
  }
  if (setup.with_transplant) {
    AssembledSystem o1sys = assemble(setup.o1, setup.g1.materialize(setup.o1));
    rec.bound = delta_bound(setup.o1, o1sys, gc.p1_chart, eps, ref.eigenvalues[setup.k]);
    // vertex map O1 -> mesh1 from the excision (recomputed through the same
    // deterministic path the builder used)
    OrbiMesh resolved = resolve_disc(setup.o1, setup.p1, eps, setup.k_boundary);
    ExciseResult er = excise_ball(resolved, setup.p1, eps, setup.k_boundary);
    int mapped = 0;
    for (int v : er.old_to_new)
      if (v >= 0) ++mapped;
    if (mapped + static_cast<int>(er.ring.size()) != er.mesh.n_vertices())
      throw std::runtime_error(
          "collapse_sweep: O1 mesh must be pre-resolved at every swept epsilon");
    rec.transplant = transplant_upper_bound(ref, setup.o1, er.old_to_new, gc, sys, rec.bound);
  }
  if (setup.with_trace) rec.trace = trace_values(gc, spec, std::min(setup.k, 4));
  return rec;
}

}  // namespace

CollapseResult collapse_sweep(const CollapseSetup& setup, const std::vector<double>& eps_list,
                              int threads) {
  if (eps_list.empty()) throw std::invalid_argument("collapse_sweep: empty epsilon list");
  for (size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("collapse_sweep: epsilon list must be strictly decreasing");

  // resolve O1 for every swept epsilon up front so all excisions run on one
  // shared mesh and discretization bias cancels in the gaps
  CollapseSetup prep = setup;
  for (double e : eps_list) prep.o1 = resolve_disc(prep.o1, prep.p1, e, prep.k_boundary);

  CollapseResult result;
  MetricField g1 = prep.g1.materialize(prep.o1);
  AssembledSystem o1sys = assemble(prep.o1, g1);
  result.reference = solve_smallest(o1sys, prep.k, prep.solve);

  result.records.resize(eps_list.size());
  if (threads <= 1) {
    for (size_t i = 0; i < eps_list.size(); ++i)
      result.records[i] = sweep_entry(prep, result.reference, eps_list[i]);
  } else {
    std::vector<std::future<SweepRecord>> futs;
    for (size_t i = 0; i < eps_list.size(); ++i)
      futs.push_back(std::async(std::launch::async, [&, i] {
        return sweep_entry(prep, result.reference, eps_list[i]);
      }));
    for (size_t i = 0; i < eps_list.size(); ++i) result.records[i] = futs[i].get();
  }
  return result;
}

std::vector<SmoothApproxRecord> smooth_approx_check(const GluedComplex& gc,
                                                    const SpectrumResult& glued_spec,
                                                    const std::vector<double>& lambda_ref,
                                                    const std::vector<double>& widths, int k,
                                                    const SolveOptions& opts) {
  for (size_t i = 1; i < widths.size(); ++i)
    if (!(widths[i] < widths[i - 1]))
      throw std::invalid_argument("smooth_approx_check: widths must be strictly decreasing");
  std::vector<SmoothApproxRecord> out;
  for (double w : widths) {
    auto [m1, m2] = mollify_across_interface(gc, w);
    SmoothApproxRecord rec;
    rec.width = w;
    rec.delta_w = std::max(rho_double_prime(gc.g1, m1).rho_pp,
                           rho_double_prime(gc.g2_scaled, m2).rho_pp);
    GluedComplex mgc = gc;
    mgc.g1 = m1;
    mgc.g2_scaled = m2;
    AssembledSystem sys = assemble_glued(mgc);
    SpectrumResult spec = solve_smallest(sys, k, opts);
    double env = std::exp(3.0 * rec.delta_w) - 1.0;
    for (int j = 0; j <= k; ++j) {
      rec.lambda_mollified.push_back(spec.eigenvalues[j]);
      double lhs = std::abs(spec.eigenvalues[j] - lambda_ref[j]);
      double rhs = std::abs(glued_spec.eigenvalues[j] - lambda_ref[j]) +
                   env * glued_spec.eigenvalues[j];
      if (lhs > rhs + 1e-12) rec.envelope_ok = false;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

std::vector<double> lattice_spectrum(double side, int count, bool quotient) {
  // eigenvalues (2 pi / L)^2 (j^2 + k^2); quotient keeps one function per
  // orbit of (j,k) -> (-j,-k)
  const double scale = std::pow(2 * kPi / side, 2);
  std::map<long long, long long> mult;  // j^2+k^2 -> lattice count
  int B = 2;
  auto enough = [&]() {
    // values <= (B-1)^2 are complete; count how many eigenvalues that yields
    long long have = 0;
    for (const auto& [q, c] : mult) {
      if (q > static_cast<long long>(B - 1) * (B - 1)) break;
      have += quotient ? (c + (q == 0 ? 1 : 0)) / 2 : c;
    }
    return have >= count;
  };
  while (!enough() && B < 4096) {
    B *= 2;
    mult.clear();
    for (int j = -B; j <= B; ++j)
      for (int k = -B; k <= B; ++k) mult[static_cast<long long>(j) * j + static_cast<long long>(k) * k]++;
  }
  std::vector<double> out;
  for (const auto& [q, c] : mult) {
    if (q > static_cast<long long>(B - 1) * (B - 1)) break;
    long long m = quotient ? (c + (q == 0 ? 1 : 0)) / 2 : c;
    for (long long i = 0; i < m && static_cast<int>(out.size()) < count; ++i)
      out.push_back(scale * q);
    if (static_cast<int>(out.size()) >= count) break;
  }
  return out;
}

const double kBesselZeros[8][5] = {
    {2.404825557695773, 5.520078110286311, 8.653727912911013, 11.791534439014281,
     14.930917708487787},
    {3.831705970207512, 7.015586669815619, 10.173468135062722, 13.323691936314223,
     16.470630050877634},
    {5.135622301840683, 8.417244140399864, 11.619841172149059, 14.795951782351260,
     17.959819494987826},
    {6.380161895923984, 9.761023129981670, 13.015200721698434, 16.223466160318768,
     19.409415226435012},
    {7.588342434503804, 11.064709488501185, 14.372536671617590, 17.615966049706339,
     20.826932956962388},
    {8.771483815959954, 12.338604197466944, 15.700174079711671, 18.980133875179921,
     22.217799896561268},
    {9.936109524217684, 13.589290170541217, 16.937499727731349, 20.320789213566506,
     23.586084435581391},
    {11.086370019245084, 14.821268727013171, 18.287582832481726, 21.641541019848401,
     24.934927887673022}};

}  // namespace

std::vector<double> reference_spectrum(const ReferenceModel& model, int count) {
  if (count <= 0) throw std::invalid_argument("reference_spectrum: count must be positive");
  std::vector<double> out;
  switch (model.kind) {
    case ReferenceModel::Kind::Torus:
      return lattice_spectrum(model.size, count, false);
    case ReferenceModel::Kind::Pillowcase:
      return lattice_spectrum(model.size, count, true);
    case ReferenceModel::Kind::Sphere:
      for (int l = 0; static_cast<int>(out.size()) < count; ++l)
        for (int q = -l; q <= l && static_cast<int>(out.size()) < count; ++q)
          out.push_back(l * (l + 1) / (model.size * model.size));
      return out;
    case ReferenceModel::Kind::Spindle: {
      if (model.m < 1) throw std::invalid_argument("reference_spectrum: spindle order >= 1");
      for (int l = 0; static_cast<int>(out.size()) < count; ++l) {
        int mult = 2 * (l / model.m) + 1;  // q in [-l, l] with m | q
        for (int i = 0; i < mult && static_cast<int>(out.size()) < count; ++i)
          out.push_back(l * (l + 1) / (model.size * model.size));
      }
      return out;
    }
    case ReferenceModel::Kind::DiscDirichlet: {
      std::vector<std::pair<double, int>> vals;  // (eigenvalue, multiplicity)
      for (int nu = 0; nu < 8; ++nu)
        for (int s = 0; s < 5; ++s) {
          double z = kBesselZeros[nu][s] / model.size;
          vals.push_back({z * z, nu == 0 ? 1 : 2});
        }
      std::sort(vals.begin(), vals.end());
      for (const auto& [v, m] : vals)
        for (int i = 0; i < m && static_cast<int>(out.size()) < count; ++i) out.push_back(v);
      if (static_cast<int>(out.size()) < count)
        throw std::invalid_argument("reference_spectrum: disc table exhausted");
      return out;
    }
  }
  throw std::logic_error("reference_spectrum: unknown model");
}

}  // namespace orbi
