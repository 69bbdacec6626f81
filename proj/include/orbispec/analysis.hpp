#pragma once

#include "orbispec/assembly.hpp"
#include "orbispec/csum.hpp"
#include "orbispec/eigensolver.hpp"

namespace orbi {

// Logarithmic cutoff: 0 on [0, eps], -(2/ln eps) ln(r/eps) on [eps, sqrt(eps)],
// 1 beyond.
double chi(double epsilon, double r);

// Closed form for the Dirichlet energy of chi on a flat cone of total angle
// 2*pi/group_order: 4*pi/(group_order*|ln eps|) in dimension 2; the general-n
// formula is provided as well.
double grad_chi_norm_sq_closed_form(double epsilon, int n, int group_order);

struct BoundReport {
  double epsilon = 0;
  double lambda_k_ref = 0;
  double term_l2 = 0;        // ||1 - chi^2||_0
  double term_qnorm = 0;     // ||chi - 1||_q
  double term_qnorm_sq = 0;  // ||chi - 1||_q^2
  double chi_dirichlet = 0;  // chi^T K chi
  double delta_value = 0;    // 2 (1 + lambda_k)(t1 + 2 t2 + t2^2)
};

// Evaluate the cutoff on the closed O1 mesh (vertexwise, distance to p1 in
// the flat excision chart) and assemble the three norms with the O1
// matrices. Rejects meshes that do not resolve radius eps at p1.
BoundReport delta_bound(const OrbiMesh& o1, const AssembledSystem& sys, const Vec2& p1_pos,
                        double epsilon, double lambda_k_ref);

// P1 interpolant of chi * f_j on O1, transported to the glued complex
// (zero on the second factor), for each column of `modes`.
struct TransplantReport {
  std::vector<double> quotients;     // Rayleigh quotients on the glued complex
  std::vector<double> bounds;        // lambda_j(O1) + delta
  double min_gram_singular = 0;      // smallest singular value of the M-Gram
  double max_gram_deviation = 0;     // max |Gram - I| entry
};

TransplantReport transplant_upper_bound(const SpectrumResult& o1_modes, const OrbiMesh& o1,
                                        const std::vector<int>& o1_to_mesh1,
                                        const GluedComplex& gc, const AssembledSystem& glued_sys,
                                        const BoundReport& bound);

// Discrete Dirichlet extension of ring boundary data across the excised
// ball, on a matching disc mesh.
struct HarmonicExtensionResult {
  OrbiMesh disc;
  Eigen::VectorXd values;
  double dirichlet_energy = 0;
  double h1_norm = 0;
};

HarmonicExtensionResult harmonic_extension(double radius, int k_boundary, double h,
                                           const Eigen::VectorXd& ring_values);

// sqrt(eps) * ||f^1_j restricted to the interface||_{L^2(interface, g1)} for
// j <= k, averaged over numerical multiplicity clusters so the value is
// basis-independent.
std::vector<double> trace_values(const GluedComplex& gc, const SpectrumResult& spec, int k);

struct ScalingCheckReport {
  double mass_max_rel_dev = 0;       // |u'M2u - eps^2 u'M1u| / eps^2 u'M1u
  double stiffness_max_rel_dev = 0;  // |u'K2u - u'K1u| / u'K1u
};

// Conformal scaling identities at matrix level over random vectors.
ScalingCheckReport scaling_identity_check(const OrbiMesh& mesh, const MetricField& field,
                                          double epsilon, int n_samples, std::uint64_t seed);

struct ContinuityCheckReport {
  double delta = 0;                  // rho'' used for the envelope
  double worst_low = 1, worst_high = 1;
  bool inside_envelope = true;
  std::vector<double> ratios;
};

// Theorem bound exp(-3 delta) <= lambda_j(A)/lambda_j(B) <= exp(3 delta)
// for j <= k with lambda_j(B) > 1e-8 (n = 2).
ContinuityCheckReport continuity_check(const AssembledSystem& a, const AssembledSystem& b,
                                       double delta, int k, const SolveOptions& opts = {});

struct SweepRecord {
  double epsilon = 0;
  int dofs = 0;
  std::vector<double> lambda_glued;
  std::vector<double> lambda_ref;
  std::vector<double> gaps;
  BoundReport bound;
  TransplantReport transplant;
  std::vector<double> trace;
  bool solver_converged = true;
};

struct CollapseSetup {
  OrbiMesh o1;                 // closed, already resolved for the smallest eps
  MetricSpec g1;
  int p1 = -1;
  OrbiMesh o2;
  MetricSpec g2;
  int p2 = -1;
  int k_boundary = 32;
  int k = 6;
  SolveOptions solve;
  bool with_transplant = true;
  bool with_trace = true;
};

// Reference spectrum of O1 plus one record per epsilon (strictly
// decreasing); the same O1 mesh is excised at every epsilon so
// discretization bias cancels in the gaps.
struct CollapseResult {
  SpectrumResult reference;
  std::vector<SweepRecord> records;
};

CollapseResult collapse_sweep(const CollapseSetup& setup, const std::vector<double>& eps_list,
                              int threads = 1);

struct SmoothApproxRecord {
  double width = 0;
  double delta_w = 0;  // rho''(g_eps, mollified)
  std::vector<double> lambda_mollified;
  bool envelope_ok = true;
};

// Mollify the glued metric at each width and test the composite envelope
// |lambda_j(mollified) - lambda_j(O1)| <=
//     |lambda_j(g_eps) - lambda_j(O1)| + (exp(3 delta_w) - 1) lambda_j(g_eps).
std::vector<SmoothApproxRecord> smooth_approx_check(const GluedComplex& gc,
                                                    const SpectrumResult& glued_spec,
                                                    const std::vector<double>& lambda_ref,
                                                    const std::vector<double>& widths, int k,
                                                    const SolveOptions& opts = {});

// Closed-form / counting reference spectra.
struct ReferenceModel {
  enum class Kind { Torus, Pillowcase, Sphere, Spindle, DiscDirichlet };
  Kind kind = Kind::Torus;
  double size = 2 * 3.14159265358979323846;  // side length or radius
  int m = 1;                                 // spindle order
};

std::vector<double> reference_spectrum(const ReferenceModel& model, int count);

}  // namespace orbi
