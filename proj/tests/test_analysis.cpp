#include "orbispec/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace orbi;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("cutoff chi: knots, closed-form value, monotonicity") {
  CHECK(chi(0.01, 0.0) == 0.0);
  CHECK(chi(0.01, 0.01) == 0.0);
  CHECK(chi(0.01, 0.1) == 1.0);
  CHECK(chi(0.01, 0.5) == 1.0);
  CHECK(chi(0.01, 0.05) == doctest::Approx(std::log(5.0) / std::log(10.0)).epsilon(1e-12));
  double prev = -1;
  for (int i = 0; i <= 200; ++i) {
    double r = 0.002 * i;
    double v = chi(0.01, r);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  CHECK_THROWS_AS(chi(1.5, 0.2), std::invalid_argument);
}

TEST_CASE("closed-form Dirichlet energy of chi") {
  double eps = std::exp(-4.0);
  CHECK(std::abs(grad_chi_norm_sq_closed_form(eps, 2, 1) - kPi) <= 1e-12);
  CHECK(grad_chi_norm_sq_closed_form(0.05, 2, 2) ==
        doctest::Approx(0.5 * grad_chi_norm_sq_closed_form(0.05, 2, 1)).epsilon(1e-14));
  CHECK_THROWS_AS(grad_chi_norm_sq_closed_form(1.0, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(grad_chi_norm_sq_closed_form(0.0, 2, 1), std::invalid_argument);
  // the n >= 3 branch exists and is positive and vanishing as eps -> 0
  double a = grad_chi_norm_sq_closed_form(0.01, 3, 1);
  double b = grad_chi_norm_sq_closed_form(0.0001, 3, 1);
  CHECK(a > 0);
  CHECK(b < a);
}

namespace {

struct DeltaFixture {
  OrbiMesh mesh;
  AssembledSystem sys;
  Vec2 p1;
  DeltaFixture() {
    OrbiMesh base = build_flat_torus(2 * kPi, 0.25);
    int c = nearest_vertex(base, Vec2(kPi, kPi));
    ReplaceDiscResult rd = replace_disc(base, c, 0.5, 32, 0.9, 0.004);
    mesh = rd.mesh;
    p1 = mesh.vertices[rd.center];
    sys = assemble(mesh, euclidean(mesh));
  }
};

}  // namespace

TEST_CASE("delta bound: positivity, linear factor, monotone trend, chi energy") {
  DeltaFixture fx;
  BoundReport r02 = delta_bound(fx.mesh, fx.sys, fx.p1, 0.2, 1.0);
  CHECK(r02.delta_value > 0);
  CHECK(r02.term_l2 > 0);
  CHECK(r02.delta_value ==
        doctest::Approx(2 * (1 + 1.0) *
                        (r02.term_l2 + 2 * r02.term_qnorm + r02.term_qnorm_sq))
            .epsilon(1e-14));

  // doubling (1 + lambda_k) doubles delta exactly
  BoundReport r3 = delta_bound(fx.mesh, fx.sys, fx.p1, 0.2, 3.0);
  CHECK(r3.delta_value == doctest::Approx(2.0 * r02.delta_value).epsilon(1e-14));

  BoundReport r005 = delta_bound(fx.mesh, fx.sys, fx.p1, 0.05, 1.0);
  CHECK(r005.delta_value < r02.delta_value);

  // discrete chi energy vs closed form, 5%
  for (double e : {0.2, 0.05}) {
    BoundReport r = delta_bound(fx.mesh, fx.sys, fx.p1, e, 1.0);
    double exact = grad_chi_norm_sq_closed_form(e, 2, 1);
    CHECK(std::abs(r.chi_dirichlet - exact) / exact < 0.05);
  }

  // unresolved epsilon is rejected
  CHECK_THROWS_AS(delta_bound(fx.mesh, fx.sys, fx.p1, 1e-4, 1.0), std::invalid_argument);
}

TEST_CASE("harmonic extension: constants, linears, Dirichlet principle") {
  const int k = 32;
  Eigen::VectorXd constant = Eigen::VectorXd::Constant(k, 2.5);
  HarmonicExtensionResult ce = harmonic_extension(0.5, k, 0.1, constant);
  CHECK(ce.dirichlet_energy <= 1e-12);
  for (int i = 0; i < ce.values.size(); ++i) CHECK(ce.values[i] == doctest::Approx(2.5).epsilon(1e-10));

  // boundary data x restricted to the circle extends to the linear function x
  Eigen::VectorXd xdata(k);
  for (int i = 0; i < k; ++i) xdata[i] = 0.5 * std::cos(2 * kPi * i / k);
  HarmonicExtensionResult xe = harmonic_extension(0.5, k, 0.1, xdata);
  for (int v = 0; v < xe.disc.n_vertices(); ++v)
    CHECK(xe.values[v] == doctest::Approx(xe.disc.vertices[v].x()).epsilon(1e-10));

  // minimal energy among interpolants with the same boundary data
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 0.3);
  Eigen::VectorXd data(k);
  for (int i = 0; i < k; ++i) data[i] = gauss(rng);
  HarmonicExtensionResult he = harmonic_extension(0.5, k, 0.1, data);
  AssembledSystem dsys = assemble(he.disc, euclidean(he.disc));
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd other = he.values;
    for (int v = 0; v < other.size(); ++v) {
      bool on_boundary = false;
      for (int b : he.disc.boundary_loops[0]) on_boundary |= (b == v);
      if (!on_boundary) other[v] += gauss(rng);
    }
    CHECK(other.dot(dsys.K * other) >= he.dirichlet_energy - 1e-12);
  }
}

TEST_CASE("scaling identity check") {
  OrbiMesh torus = build_flat_torus(2 * kPi, 0.4);
  MetricField g = euclidean(torus);
  for (double e : {1.0, 0.3}) {
    ScalingCheckReport rep = scaling_identity_check(torus, g, e, 100, 42);
    CHECK(rep.mass_max_rel_dev <= 1e-12);
    CHECK(rep.stiffness_max_rel_dev <= 1e-12);
  }
}

TEST_CASE("continuity check: identity and exact scaling") {
  OrbiMesh torus = build_flat_torus(2 * kPi, 0.35);
  MetricField g = euclidean(torus);
  AssembledSystem sys = assemble(torus, g);
  ContinuityCheckReport same = continuity_check(sys, sys, 0.0, 5);
  for (double r : same.ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.inside_envelope);

  for (double c : {0.5, 2.0}) {
    AssembledSystem scaled = assemble(torus, scale(g, c));
    ContinuityCheckReport rep = continuity_check(sys, scaled, std::abs(std::log(c)), 5);
    CHECK(rep.inside_envelope);
    for (double r : rep.ratios) CHECK(r == doctest::Approx(c).epsilon(1e-8));
  }
}

TEST_CASE("reference spectra: lattice, invariant counting, spherical") {
  auto torus = reference_spectrum({ReferenceModel::Kind::Torus, 2 * kPi, 1}, 10);
  CHECK(torus == std::vector<double>{0, 1, 1, 1, 1, 2, 2, 2, 2, 4});

  auto pillow = reference_spectrum({ReferenceModel::Kind::Pillowcase, 2 * kPi, 1}, 9);
  CHECK(pillow == std::vector<double>{0, 1, 1, 2, 2, 4, 4, 5, 5});

  auto sphere = reference_spectrum({ReferenceModel::Kind::Sphere, 1.0, 1}, 9);
  CHECK(sphere == std::vector<double>{0, 2, 2, 2, 6, 6, 6, 6, 6});

  auto spin2 = reference_spectrum({ReferenceModel::Kind::Spindle, 1.0, 2}, 8);
  CHECK(spin2 == std::vector<double>{0, 2, 6, 6, 6, 12, 12, 12});
  auto spin3 = reference_spectrum({ReferenceModel::Kind::Spindle, 1.0, 3}, 8);
  CHECK(spin3 == std::vector<double>{0, 2, 6, 12, 12, 12, 20, 20});

  auto disc = reference_spectrum({ReferenceModel::Kind::DiscDirichlet, 1.0, 1}, 5);
  CHECK(disc[0] == doctest::Approx(5.7831859629467).epsilon(1e-10));
  CHECK(disc[1] == doctest::Approx(disc[2]).epsilon(1e-14));

  // torus(1): scale (2 pi)^2
  auto t1 = reference_spectrum({ReferenceModel::Kind::Torus, 1.0, 1}, 2);
  CHECK(t1[1] == doctest::Approx(4 * kPi * kPi).epsilon(1e-12));
}

TEST_CASE("collapse sweep smoke test: single epsilon record") {
  CollapseSetup setup;
  auto o1mesh = build_flat_torus(2 * kPi, 0.35);
  setup.p1 = nearest_vertex(o1mesh, Vec2(kPi, kPi));
  setup.o1 = resolve_disc(o1mesh, setup.p1, 0.4, 16);
  setup.g1.kind = MetricSpec::Kind::Euclidean;
  setup.o2 = build_pillowcase(8.0, 0.4);
  setup.g2.kind = MetricSpec::Kind::Euclidean;
  setup.p2 = nearest_vertex(setup.o2, Vec2(4.0, 2.0));
  setup.k_boundary = 16;
  setup.k = 2;
  setup.with_trace = true;
  setup.with_transplant = true;

  CollapseResult res = collapse_sweep(setup, {0.4}, 1);
  REQUIRE(res.records.size() == 1);
  const auto& rec = res.records[0];
  CHECK(rec.solver_converged);
  CHECK(rec.gaps.size() == 3);
  CHECK(rec.lambda_glued[0] <= 1e-8);
  for (double q : rec.transplant.quotients) CHECK(q >= 0);
  for (size_t j = 0; j < rec.transplant.quotients.size(); ++j)
    CHECK(rec.transplant.quotients[j] <= rec.transplant.bounds[j] * 1.02);
  CHECK(rec.trace.size() == 3);
  // j = 0: nearly constant eigenfunction, trace value close to
  // sqrt(eps) * sqrt(length(ring)) * |c| with c the constant value
  CHECK(rec.trace[0] > 0);

  CHECK_THROWS_AS(collapse_sweep(setup, {0.1, 0.4}, 1), std::invalid_argument);
}

TEST_CASE("smooth approximation smoke test") {
  CollapseSetup setup;
  auto o1mesh = build_flat_torus(2 * kPi, 0.3);
  setup.p1 = nearest_vertex(o1mesh, Vec2(kPi, kPi));
  setup.o1 = resolve_disc(o1mesh, setup.p1, 0.25, 64);
  setup.g1.kind = MetricSpec::Kind::Euclidean;
  setup.o2 = build_pillowcase(8.0, 0.4);
  setup.g2.kind = MetricSpec::Kind::Euclidean;
  setup.p2 = nearest_vertex(setup.o2, Vec2(4.0, 2.0));
  setup.k_boundary = 64;
  setup.k = 2;
  setup.with_trace = false;
  setup.with_transplant = false;

  ConnectedSumConfig cfg;
  cfg.epsilon = 0.25;
  cfg.p1 = setup.p1;
  cfg.p2 = setup.p2;
  cfg.k_boundary = 64;
  GluedComplex gc = build_connected_sum({setup.o1, setup.g1}, {setup.o2, setup.g2}, cfg);
  AssembledSystem sys = assemble_glued(gc);
  SpectrumResult glued = solve_smallest(sys, 2);
  AssembledSystem o1sys = assemble(setup.o1, setup.g1.materialize(setup.o1));
  SpectrumResult ref = solve_smallest(o1sys, 2);
  std::vector<double> lref{ref.eigenvalues[0], ref.eigenvalues[1], ref.eigenvalues[2]};

  auto recs = smooth_approx_check(gc, glued, lref, {0.2, 0.1}, 2);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].delta_w > 0);
  CHECK(recs[1].delta_w <= recs[0].delta_w * (1 + 1e-9));
  CHECK(recs[0].envelope_ok);
  CHECK(recs[1].envelope_ok);
}
