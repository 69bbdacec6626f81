// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.

#include "orbispec/analysis.hpp"
#include "orbispec/experiments.hpp"
#include "orbispec/serialization.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

using namespace orbi;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream note;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [" << what << "]";
    }
  }
};

int g_failures = 0;

template <typename F>
void criterion(int id, const std::string& name, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.note << " [exception: " << e.what() << "]";
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name << " ("
            << secs << " s)" << out.note.str() << "\n"
            << std::flush;
  if (!out.pass) ++g_failures;
}

// shared canonical sweep for criteria 3, 4, 7
struct SweepState {
  CollapseSetup setup;
  CollapseResult result;
  std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
  bool ready = false;
};
SweepState g_sweep;

void run_canonical_sweep() {
  if (g_sweep.ready) return;
  OrbiMesh torus = build_flat_torus(2 * kPi, 0.12);
  int p1 = nearest_vertex(torus, Vec2(kPi, kPi));
  ReplaceDiscResult rd = replace_disc(torus, p1, 1.1 * std::sqrt(g_sweep.eps.front()), 32, 0.9,
                                      0.4 * 2 * kPi * g_sweep.eps.back() / 32);
  g_sweep.setup.o1 = rd.mesh;
  g_sweep.setup.g1.kind = MetricSpec::Kind::Euclidean;
  g_sweep.setup.p1 = rd.center;
  g_sweep.setup.o2 = build_pillowcase(2 * kPi, 0.2);
  g_sweep.setup.g2.kind = MetricSpec::Kind::Euclidean;
  g_sweep.setup.p2 = nearest_vertex(g_sweep.setup.o2, Vec2(kPi, kPi / 2));
  g_sweep.setup.k_boundary = 32;
  g_sweep.setup.k = 6;
  g_sweep.result = collapse_sweep(g_sweep.setup, g_sweep.eps, 1);
  g_sweep.ready = true;
}

}  // namespace

int main() {
  // 1. solver validation on the flat torus
  criterion(1, "torus oracle within 2% at h=0.1 and refinement rate >= 1.8", [](Outcome& out) {
    auto t0 = std::chrono::steady_clock::now();
    OrbiMesh torus = build_flat_torus(2 * kPi, 0.1);
    AssembledSystem sys = assemble(torus, euclidean(torus));
    SpectrumResult spec = solve_smallest(sys, 9);
    out.require(spec.converged, "solver converged");
    auto oracle = reference_spectrum({ReferenceModel::Kind::Torus, 2 * kPi, 1}, 10);
    out.require(std::abs(spec.eigenvalues[0]) <= 1e-8, "lambda_0 = 0");
    for (int j = 1; j < 10; ++j)
      out.require(std::abs(spec.eigenvalues[j] - oracle[j]) / oracle[j] <= 0.02,
                  "lambda_" + std::to_string(j) + " within 2%");
    OrbiMesh fine = refine(torus);
    AssembledSystem fsys = assemble(fine, euclidean(fine));
    SpectrumResult fspec = solve_smallest(fsys, 9);
    double ec = 0, ef = 0;
    for (int j = 1; j < 10; ++j) {
      ec += std::abs(spec.eigenvalues[j] - oracle[j]);
      ef += std::abs(fspec.eigenvalues[j] - oracle[j]);
    }
    double rate = std::log2(ec / ef);
    out.note << " rate=" << rate;
    out.require(rate >= 1.8, "rate >= 1.8");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(secs <= 60.0, "runtime <= 60 s");
  });

  // 2. orbifold validation: pillowcase and spindles
  criterion(2, "pillowcase and spindle oracles within 3% (first 8)", [](Outcome& out) {
    auto t0 = std::chrono::steady_clock::now();
    {
      OrbiMesh pc = build_pillowcase(2 * kPi, 0.1, 0.5);
      AssembledSystem sys = assemble(pc, euclidean(pc));
      SpectrumResult spec = solve_smallest(sys, 7);
      auto oracle = reference_spectrum({ReferenceModel::Kind::Pillowcase, 2 * kPi, 1}, 8);
      out.require(std::abs(spec.eigenvalues[0]) <= 1e-8, "pillowcase lambda_0");
      for (int j = 1; j < 8; ++j)
        out.require(std::abs(spec.eigenvalues[j] - oracle[j]) / oracle[j] <= 0.03,
                    "pillowcase lambda_" + std::to_string(j));
    }
    for (int m : {2, 3}) {
      OrbiMesh sp = build_spindle(m, 0.05);
      AssembledSystem sys = assemble(sp, round_sphere(sp, 1.0));
      SpectrumResult spec = solve_smallest(sys, 7);
      auto oracle = reference_spectrum({ReferenceModel::Kind::Spindle, 1.0, m}, 8);
      out.require(std::abs(spec.eigenvalues[0]) <= 1e-8, "spindle lambda_0");
      for (int j = 1; j < 8; ++j)
        out.require(std::abs(spec.eigenvalues[j] - oracle[j]) / oracle[j] <= 0.03,
                    "spindle m=" + std::to_string(m) + " lambda_" + std::to_string(j));
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(secs <= 120.0, "runtime <= 120 s");
  });

  // 3. collapse of the canonical pair
  criterion(3, "collapse: gaps non-increasing (10% slack), final gap <= 10%", [](Outcome& out) {
    auto t0 = std::chrono::steady_clock::now();
    run_canonical_sweep();
    const auto& res = g_sweep.result;
    for (const auto& rec : res.records)
      out.require(rec.solver_converged, "solver converged");
    for (int j = 0; j <= 6; ++j) {
      double ref = res.reference.eigenvalues[j];
      for (size_t i = 1; i < res.records.size(); ++i)
        out.require(res.records[i].gaps[j] <=
                        1.1 * res.records[i - 1].gaps[j] + 1e-6 * std::max(1.0, ref),
                    "gap trend j=" + std::to_string(j));
      double final_gap = res.records.back().gaps[j];
      out.require(ref < 1.0 ? final_gap <= 0.1 : final_gap <= 0.1 * ref,
                  "final gap j=" + std::to_string(j));
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(secs <= 600.0, "runtime <= 10 min");
  });

  // 4. transplant inequality and delta monotonicity
  criterion(4, "transplant R_j <= lambda_j + delta (2% slack), delta(0.05) < delta(0.2)",
            [](Outcome& out) {
              run_canonical_sweep();
              const auto& res = g_sweep.result;
              double delta_02 = 0, delta_005 = 0;
              for (const auto& rec : res.records) {
                for (size_t j = 0; j < rec.transplant.quotients.size(); ++j)
                  out.require(rec.transplant.quotients[j] <= rec.transplant.bounds[j] * 1.02,
                              "eps=" + std::to_string(rec.epsilon) + " j=" + std::to_string(j));
                out.require(rec.transplant.min_gram_singular > 1e-6, "transplant independence");
                if (std::abs(rec.epsilon - 0.2) < 1e-12) delta_02 = rec.bound.delta_value;
                if (std::abs(rec.epsilon - 0.05) < 1e-12) delta_005 = rec.bound.delta_value;
              }
              out.note << " delta(0.2)=" << delta_02 << " delta(0.05)=" << delta_005;
              out.require(delta_005 < delta_02, "delta decreases");
            });

  // 5. closed form for the cutoff energy
  criterion(5, "chi energy matches 4 pi / (m |ln eps|) within 5%; exact at eps=e^-4",
            [](Outcome& out) {
              double analytic = grad_chi_norm_sq_closed_form(std::exp(-4.0), 2, 1);
              out.require(std::abs(analytic - kPi) <= 1e-12, "analytic value pi");
              OrbiMesh base = build_flat_torus(2 * kPi, 0.15);
              int p1 = nearest_vertex(base, Vec2(kPi, kPi));
              ReplaceDiscResult rd = replace_disc(base, p1, 0.27, 32, 0.9, 0.002);
              OrbiMesh torus = rd.mesh;
              AssembledSystem sys = assemble(torus, euclidean(torus));
              Vec2 pos = torus.vertices[rd.center];
              for (double e : {0.05, 0.02}) {
                BoundReport rep = delta_bound(torus, sys, pos, e, 1.0);
                double exact = grad_chi_norm_sq_closed_form(e, 2, 1);
                double rel = std::abs(rep.chi_dirichlet - exact) / exact;
                out.note << " eps=" << e << " rel=" << rel;
                out.require(rel <= 0.05, "5% at eps=" + std::to_string(e));
              }
            });

  // 6. conformal scaling identities
  criterion(6, "scaling identities exact to 1e-12 over 100 random vectors", [](Outcome& out) {
    OrbiMesh torus = build_flat_torus(2 * kPi, 0.3);
    MetricField g = euclidean(torus);
    for (double e : {1.0, 0.3, 0.05}) {
      ScalingCheckReport rep = scaling_identity_check(torus, g, e, 100, 20240229);
      out.require(rep.mass_max_rel_dev <= 1e-12, "mass identity at eps=" + std::to_string(e));
      out.require(rep.stiffness_max_rel_dev <= 1e-12,
                  "stiffness identity at eps=" + std::to_string(e));
    }
  });

  // 7. trace decay along the sweep
  criterion(7, "interface trace decays from eps=0.4 to eps=0.05 (10% slack)", [](Outcome& out) {
    run_canonical_sweep();
    const auto& res = g_sweep.result;
    const auto& first = res.records.front().trace;
    const auto& last = res.records.back().trace;
    for (size_t j = 0; j < std::min<size_t>(5, std::min(first.size(), last.size())); ++j) {
      out.note << " j" << j << ": " << first[j] << "->" << last[j];
      out.require(last[j] <= 1.1 * first[j] + 1e-9, "decay j=" + std::to_string(j));
    }
  });

  // 8. continuity envelope under random metric perturbations
  criterion(8, "200 perturbations with rho''<=0.1 stay inside exp(+-0.3); exact scaling cases",
            [](Outcome& out) {
              OrbiMesh torus = build_flat_torus(2 * kPi, 0.3);
              MetricField base = euclidean(torus);
              AssembledSystem bsys = assemble(torus, base);
              std::mt19937_64 rng(20240229);
              std::uniform_real_distribution<double> uni(-0.1, 0.1);
              std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
              const double lo = std::exp(-0.3), hi = std::exp(0.3);
              SpectrumResult sb = solve_smallest(bsys, 10);
              for (int trial = 0; trial < 200; ++trial) {
                MetricField pert = base;
                for (int t = 0; t < base.size(); ++t) {
                  double s1 = uni(rng), s2 = uni(rng), a = ang(rng);
                  Eigen::Matrix2d Q;
                  Q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
                  Eigen::Vector2d ex(std::exp(s1), std::exp(s2));
                  pert.base[t] = Q * ex.asDiagonal() * Q.transpose();
                }
                double rho = rho_double_prime(base, pert).rho_pp;
                out.require(rho <= 0.1 + 1e-12, "rho'' within 0.1");
                AssembledSystem psys = assemble(torus, pert);
                SpectrumResult sp = solve_smallest(psys, 10);
                for (int j = 0; j <= 10; ++j) {
                  if (sp.eigenvalues[j] <= 1e-8) continue;
                  double ratio = sb.eigenvalues[j] / sp.eigenvalues[j];
                  if (!(ratio >= lo && ratio <= hi)) {
                    out.require(false, "trial " + std::to_string(trial) + " j=" +
                                           std::to_string(j));
                    break;
                  }
                }
              }
              for (double c : {0.5, 2.0}) {
                AssembledSystem ssys = assemble(torus, scale(base, c));
                SpectrumResult ss = solve_smallest(ssys, 10);
                double env = std::exp(3 * std::abs(std::log(c)));
                for (int j = 1; j <= 10; ++j) {
                  double ratio = sb.eigenvalues[j] / ss.eigenvalues[j];
                  out.require(std::abs(ratio - c) <= 1e-6 * c, "exact ratio c=" + std::to_string(c));
                  out.require(ratio >= 1 / env && ratio <= env, "envelope c=" + std::to_string(c));
                }
              }
            });

  // 9. smooth approximation composite
  criterion(9, "mollified metrics: delta_w non-increasing, composite envelope for j<=6",
            [](Outcome& out) {
              const double eps = 0.2;
              const int kb = 128;
              OrbiMesh torus = build_flat_torus(2 * kPi, 0.12);
              int p1 = nearest_vertex(torus, Vec2(kPi, kPi));
              torus = resolve_disc(torus, p1, eps, kb);
              OrbiMesh pc = build_pillowcase(2 * kPi, 0.2);
              int p2 = nearest_vertex(pc, Vec2(kPi, kPi / 2));

              MetricSpec flat;
              AssembledSystem o1sys = assemble(torus, flat.materialize(torus));
              SpectrumResult ref = solve_smallest(o1sys, 6);

              ConnectedSumConfig cfg;
              cfg.epsilon = eps;
              cfg.p1 = p1;
              cfg.p2 = p2;
              cfg.k_boundary = kb;
              GluedComplex gc = build_connected_sum({torus, flat}, {pc, flat}, cfg);
              AssembledSystem sys = assemble_glued(gc);
              SpectrumResult glued = solve_smallest(sys, 6);
              std::vector<double> lref(ref.eigenvalues.data(), ref.eigenvalues.data() + 7);
              auto recs = smooth_approx_check(gc, glued, lref, {0.08, 0.04, 0.02}, 6);
              for (size_t i = 1; i < recs.size(); ++i)
                out.require(recs[i].delta_w <= recs[i - 1].delta_w * (1 + 1e-9),
                            "delta_w non-increasing");
              for (const auto& rec : recs) {
                out.note << " w=" << rec.width << " delta=" << rec.delta_w;
                out.require(rec.envelope_ok, "envelope at width " + std::to_string(rec.width));
              }
            });

  // 10. structural invariants and determinism
  criterion(10, "K symmetric bit for bit, K1=0, M-orthonormality, byte-identical reruns",
            [](Outcome& out) {
              run_canonical_sweep();
              ConnectedSumConfig cfg;
              cfg.epsilon = 0.1;
              cfg.p1 = g_sweep.setup.p1;
              cfg.p2 = g_sweep.setup.p2;
              cfg.k_boundary = 32;
              GluedComplex gc = build_connected_sum({g_sweep.setup.o1, g_sweep.setup.g1},
                                                    {g_sweep.setup.o2, g_sweep.setup.g2}, cfg);
              AssembledSystem sys = assemble_glued(gc);
              SpMat Kt = SpMat(sys.K.transpose());
              bool sym = Kt.nonZeros() == sys.K.nonZeros();
              for (int c = 0; c < sys.K.outerSize() && sym; ++c) {
                SpMat::InnerIterator a(sys.K, c), b(Kt, c);
                for (; a && b; ++a, ++b)
                  if (a.row() != b.row() || a.value() != b.value()) sym = false;
              }
              out.require(sym, "K = K^T exactly");
              Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.n);
              double scale = 0;
              for (int c = 0; c < sys.K.outerSize(); ++c)
                for (SpMat::InnerIterator it(sys.K, c); it; ++it)
                  scale = std::max(scale, std::abs(it.value()));
              out.require((sys.K * ones).cwiseAbs().maxCoeff() <= 1e-10 * scale, "K 1 = 0");

              SpectrumResult a = solve_smallest(sys, 6);
              SpectrumResult b = solve_smallest(sys, 6);
              Eigen::MatrixXd G = a.eigenvectors.transpose() * (sys.M * a.eigenvectors);
              out.require((G - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-8,
                          "M-orthonormality");
              bool identical = true;
              for (int j = 0; j <= 6; ++j) {
                if (a.eigenvalues[j] != b.eigenvalues[j]) identical = false;
                for (int i = 0; i < sys.n; ++i)
                  if (a.eigenvectors(i, j) != b.eigenvectors(i, j)) identical = false;
              }
              out.require(identical, "bitwise deterministic solve");

              // byte-identical artifacts under a fixed seed
              namespace fs = std::filesystem;
              RunConfig rc = parse_config_text(R"({
                "version": 1, "experiment": "validate",
                "o1": {"kind": "torus", "side": 6.283185307179586, "h": 0.3},
                "validate": {"count": 6}, "tolerances": {"oracle_rel": 0.08}, "seed": 5
              })");
              fs::path base = fs::temp_directory_path() / "orbispec_acceptance";
              RunOverrides ov1, ov2;
              ov1.out_dir = (base / "a").string();
              ov2.out_dir = (base / "b").string();
              out.require(run_experiment(rc, ov1) == 0, "rerun A");
              out.require(run_experiment(rc, ov2) == 0, "rerun B");
              auto slurp = [](const fs::path& p) {
                std::ifstream in(p, std::ios::binary);
                std::stringstream ss;
                ss << in.rdbuf();
                return ss.str();
              };
              out.require(slurp(base / "a" / "results.csv") == slurp(base / "b" / "results.csv"),
                          "byte-identical results.csv");
            });

  std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed\n"
                                : "ACCEPTANCE: failures present\n");
  return g_failures == 0 ? 0 : 1;
}
