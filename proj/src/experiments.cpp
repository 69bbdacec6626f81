#include "orbispec/experiments.hpp"

#include "orbispec/serialization.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

namespace orbi {

namespace {

constexpr double kPi = std::numbers::pi;
namespace fs = std::filesystem;
using nlohmann::json;

int find_south_pole(const OrbiMesh& mesh) {
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int c = 0; c < 3; ++c)
      if (std::abs(mesh.corner_sphere[t](0, c) - kPi) < 1e-12) return mesh.triangles[t][c];
  throw std::runtime_error("sphere mesh has no south pole vertex");
}

}  // namespace

BuiltGeometry build_geometry(const GeometrySpec& spec) {
  BuiltGeometry g;
  if (spec.kind == "torus") {
    g.mesh = build_flat_torus(spec.side, spec.h);
    g.metric.kind = MetricSpec::Kind::Euclidean;
    g.default_center = nearest_vertex(g.mesh, Vec2(spec.side / 2, spec.side / 2));
    g.oracle = ReferenceModel{ReferenceModel::Kind::Torus, spec.side, 1};
  } else if (spec.kind == "pillowcase") {
    g.mesh = build_pillowcase(spec.side, spec.h, spec.grading);
    g.metric.kind = MetricSpec::Kind::Euclidean;
    g.default_center = nearest_vertex(g.mesh, Vec2(spec.side / 2, spec.side / 4));
    g.oracle = ReferenceModel{ReferenceModel::Kind::Pillowcase, spec.side, 1};
  } else if (spec.kind == "spindle") {
    g.mesh = build_spindle(spec.m, spec.h);
    g.metric.kind = MetricSpec::Kind::RoundSphere;
    g.metric.radius = spec.radius;
    g.default_center = find_south_pole(g.mesh);
    g.oracle = ReferenceModel{ReferenceModel::Kind::Spindle, spec.radius, spec.m};
  } else if (spec.kind == "sphere") {
    g.mesh = build_spindle(1, spec.h);
    g.metric.kind = MetricSpec::Kind::RoundSphere;
    g.metric.radius = spec.radius;
    g.default_center = find_south_pole(g.mesh);
    g.oracle = ReferenceModel{ReferenceModel::Kind::Sphere, spec.radius, 1};
  } else if (spec.kind == "capped-sphere") {
    // round sphere with the south cap flattened so a unit ball can be excised
    g.mesh = build_spindle(1, spec.h);
    g.metric.kind = MetricSpec::Kind::FlattenedSphere;
    g.metric.radius = spec.radius;
    g.metric.flatten_center_sphere = Vec2(kPi, 0.0);
    g.metric.flatten_r_in = 1.25;
    g.metric.flatten_r_out = 1.9;
    g.default_center = find_south_pole(g.mesh);
  } else {
    throw std::invalid_argument("unknown geometry kind '" + spec.kind + "'");
  }
  return g;
}

// --- config -----------------------------------------------------------------

namespace {

GeometrySpec parse_geometry(const json& j, const char* field) {
  if (!j.is_object()) throw std::invalid_argument(std::string(field) + " must be an object");
  GeometrySpec g;
  if (!j.contains("kind")) throw std::invalid_argument(std::string(field) + ".kind is required");
  g.kind = j.at("kind").get<std::string>();
  if (j.contains("side")) g.side = j.at("side").get<double>();
  if (j.contains("h")) g.h = j.at("h").get<double>();
  if (j.contains("grading")) g.grading = j.at("grading").get<double>();
  if (j.contains("m")) g.m = j.at("m").get<int>();
  if (j.contains("radius")) g.radius = j.at("radius").get<double>();
  return g;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  if (!j.contains("version")) throw std::invalid_argument("config.version is required");
  c.version = j.at("version").get<int>();
  if (c.version != 1) throw std::invalid_argument("config.version must be 1");
  if (!j.contains("experiment")) throw std::invalid_argument("config.experiment is required");
  c.experiment = j.at("experiment").get<std::string>();
  const std::vector<std::string> kinds{"validate", "spectrum", "collapse", "continuity",
                                       "smooth-approx"};
  if (std::find(kinds.begin(), kinds.end(), c.experiment) == kinds.end())
    throw std::invalid_argument("config.experiment must be one of validate|spectrum|collapse|"
                                "continuity|smooth-approx");
  if (j.contains("k")) c.k = j.at("k").get<int>();
  if (c.k < 1) throw std::invalid_argument("config.k must be >= 1");
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  if (j.contains("o1")) c.o1 = parse_geometry(j.at("o1"), "o1");
  if (j.contains("o2")) c.o2 = parse_geometry(j.at("o2"), "o2");
  if (j.contains("eps")) {
    c.eps = j.at("eps").get<std::vector<double>>();
    for (double e : c.eps)
      if (!(e > 0 && e < 1)) throw std::invalid_argument("config.eps entries must lie in (0,1)");
    for (size_t i = 1; i < c.eps.size(); ++i)
      if (!(c.eps[i] < c.eps[i - 1]))
        throw std::invalid_argument("config.eps must be strictly decreasing");
  }
  if (j.contains("k_boundary")) c.k_boundary = j.at("k_boundary").get<int>();
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (t.contains("solver_tol")) c.solver_tol = t.at("solver_tol").get<double>();
    if (t.contains("oracle_rel")) c.oracle_rel = t.at("oracle_rel").get<double>();
  }
  if (j.contains("validate")) {
    const auto& v = j.at("validate");
    if (v.contains("count")) c.validate_count = v.at("count").get<int>();
    if (v.contains("rate_check")) c.rate_check = v.at("rate_check").get<bool>();
  }
  if (j.contains("continuity")) {
    const auto& v = j.at("continuity");
    if (v.contains("trials")) c.trials = v.at("trials").get<int>();
    if (v.contains("rho_max")) c.rho_max = v.at("rho_max").get<double>();
    if (v.contains("scaling_cases"))
      c.scaling_cases = v.at("scaling_cases").get<std::vector<double>>();
  }
  if (j.contains("smooth_approx")) {
    const auto& v = j.at("smooth_approx");
    if (v.contains("eps")) c.sa_eps = v.at("eps").get<double>();
    if (v.contains("widths")) {
      c.widths = v.at("widths").get<std::vector<double>>();
      for (size_t i = 1; i < c.widths.size(); ++i)
        if (!(c.widths[i] < c.widths[i - 1]))
          throw std::invalid_argument("config.smooth_approx.widths must be strictly decreasing");
    }
  }
  if (c.experiment == "collapse" && c.eps.empty())
    throw std::invalid_argument("collapse experiment requires a nonempty eps list");
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// --- artifact writers -------------------------------------------------------

namespace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

void write_svg_loglog(const std::string& path, const std::string& title,
                      const std::vector<Series>& series) {
  const int W = 640, H = 480, L = 70, B = 50, T = 40, R = 30;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      x = std::log10(std::max(x, 1e-12));
      y = std::log10(std::max(y, 1e-12));
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return L + (std::log10(std::max(x, 1e-12)) - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (std::log10(std::max(y, 1e-12)) - ymin) / (ymax - ymin) * (H - B - T); };
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ofstream os(path);
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
     << "</text>\n";
  os << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - R << "' y2='" << H - B
     << "' stroke='black'/>\n";
  os << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='" << H - B
     << "' stroke='black'/>\n";
  for (int d = static_cast<int>(std::ceil(xmin)); d <= static_cast<int>(std::floor(xmax)); ++d) {
    double x = px(std::pow(10.0, d));
    os << "<line x1='" << x << "' y1='" << H - B << "' x2='" << x << "' y2='" << H - B + 5
       << "' stroke='black'/>\n";
    os << "<text x='" << x << "' y='" << H - B + 20 << "' text-anchor='middle' font-size='11'>1e"
       << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ymin)); d <= static_cast<int>(std::floor(ymax)); ++d) {
    double y = py(std::pow(10.0, d));
    os << "<line x1='" << L - 5 << "' y1='" << y << "' x2='" << L << "' y2='" << y
       << "' stroke='black'/>\n";
    os << "<text x='" << L - 8 << "' y='" << y + 4 << "' text-anchor='end' font-size='11'>1e" << d
       << "</text>\n";
  }
  int ci = 0;
  for (const auto& s : series) {
    const char* col = colors[ci % 8];
    os << "<polyline fill='none' stroke='" << col << "' stroke-width='1.5' points='";
    for (auto [x, y] : s.points) os << px(x) << "," << py(y) << " ";
    os << "'/>\n";
    os << "<text x='" << W - R - 100 << "' y='" << T + 14 * (ci + 1) << "' fill='" << col
       << "' font-size='11'>" << s.name << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
}

json geometry_json(const GeometrySpec& g) {
  return json{{"kind", g.kind},       {"side", g.side}, {"h", g.h},
              {"grading", g.grading}, {"m", g.m},       {"radius", g.radius}};
}

json config_json(const RunConfig& c) {
  json j;
  j["version"] = c.version;
  j["experiment"] = c.experiment;
  j["k"] = c.k;
  j["seed"] = c.seed;
  j["o1"] = geometry_json(c.o1);
  j["o2"] = geometry_json(c.o2);
  j["eps"] = c.eps;
  j["k_boundary"] = c.k_boundary;
  j["tolerances"] = {{"solver_tol", c.solver_tol}, {"oracle_rel", c.oracle_rel}};
  j["validate"] = {{"count", c.validate_count}, {"rate_check", c.rate_check}};
  j["continuity"] = {
      {"trials", c.trials}, {"rho_max", c.rho_max}, {"scaling_cases", c.scaling_cases}};
  j["smooth_approx"] = {{"eps", c.sa_eps}, {"widths", c.widths}};
  return j;
}

struct Artifacts {
  fs::path dir;
  json manifest;
  std::vector<std::string> assertion_log;
  bool pass = true;

  void check(bool ok, const std::string& what) {
    assertion_log.push_back(std::string(ok ? "PASS " : "FAIL ") + what);
    if (!ok) pass = false;
  }
  void finish() {
    manifest["assertions"] = assertion_log;
    manifest["pass"] = pass;
    std::ofstream os(dir / "manifest.json");
    os << manifest.dump(2) << "\n";
    for (const auto& line : assertion_log) std::cout << line << "\n";
  }
};

std::string csv_num(double v) { return format_double(v); }

}  // namespace

// --- experiments ------------------------------------------------------------

namespace {

int run_validate(const RunConfig& c, Artifacts& art, const SolveOptions& opts) {
  BuiltGeometry geo = build_geometry(c.o1);
  MetricField f = geo.metric.materialize(geo.mesh);
  AssembledSystem sys = assemble(geo.mesh, f);
  SpectrumResult spec = solve_smallest(sys, c.validate_count - 1, opts);
  if (!geo.oracle) throw std::invalid_argument("validate: geometry has no oracle");
  auto oracle = reference_spectrum(*geo.oracle, c.validate_count);

  std::ofstream csv(art.dir / "results.csv");
  csv << "j,lambda,residual,cluster,oracle,rel_error\n";
  bool ok = spec.converged;
  art.check(spec.converged, "solver converged");
  for (int j = 0; j < c.validate_count; ++j) {
    double lam = spec.eigenvalues[j], ora = oracle[j];
    double rel = ora > 1e-8 ? std::abs(lam - ora) / ora : std::abs(lam);
    csv << j << "," << csv_num(lam) << "," << csv_num(spec.residuals[j]) << ","
        << spec.clusters[j] << "," << csv_num(ora) << "," << csv_num(rel) << "\n";
    bool good = ora > 1e-8 ? rel <= c.oracle_rel : std::abs(lam) <= 1e-8;
    if (!good) ok = false;
  }
  art.check(ok, "eigenvalues match the oracle within tolerance");
  art.manifest["dofs"] = sys.n;
  art.manifest["mesh_hash"] = fnv1a64(write_mesh(geo.mesh));

  if (c.rate_check) {
    OrbiMesh fine = refine(geo.mesh);
    AssembledSystem fsys = assemble(fine, geo.metric.materialize(fine));
    SpectrumResult fspec = solve_smallest(fsys, c.validate_count - 1, opts);
    double ec = 0, ef = 0;
    for (int j = 1; j < c.validate_count; ++j) {
      ec += std::abs(spec.eigenvalues[j] - oracle[j]);
      ef += std::abs(fspec.eigenvalues[j] - oracle[j]);
    }
    double rate = std::log2(ec / ef);
    art.manifest["rate"] = rate;
    art.check(rate >= 1.8, "refinement convergence rate >= 1.8 (measured " +
                               std::to_string(rate) + ")");
  }
  return 0;
}

int run_spectrum(const RunConfig& c, Artifacts& art, const SolveOptions& opts) {
  BuiltGeometry geo = build_geometry(c.o1);
  MetricField f = geo.metric.materialize(geo.mesh);
  AssembledSystem sys = assemble(geo.mesh, f);
  SpectrumResult spec = solve_smallest(sys, c.k, opts);
  std::vector<double> oracle;
  if (geo.oracle) oracle = reference_spectrum(*geo.oracle, c.k + 1);
  std::ofstream csv(art.dir / "results.csv");
  csv << "j,lambda,residual,cluster" << (oracle.empty() ? "" : ",oracle") << "\n";
  for (int j = 0; j <= c.k; ++j) {
    csv << j << "," << csv_num(spec.eigenvalues[j]) << "," << csv_num(spec.residuals[j]) << ","
        << spec.clusters[j];
    if (!oracle.empty()) csv << "," << csv_num(oracle[j]);
    csv << "\n";
  }
  art.check(spec.converged, "solver converged");
  art.manifest["dofs"] = sys.n;
  art.manifest["mesh_hash"] = fnv1a64(write_mesh(geo.mesh));
  return 0;
}

int run_collapse(const RunConfig& c, Artifacts& art, const SolveOptions& opts, int threads) {
  BuiltGeometry g1 = build_geometry(c.o1);
  BuiltGeometry g2 = build_geometry(c.o2);

  CollapseSetup setup;
  setup.g1 = g1.metric;
  setup.g2 = g2.metric;
  setup.p2 = g2.default_center;
  setup.k_boundary = c.k_boundary;
  setup.k = c.k;
  setup.solve = opts;
  setup.o2 = g2.mesh;
  // structured concentric rings around p1 resolve both the excisions and
  // the logarithmic cutoff at every swept epsilon
  double eps_max = c.eps.front(), eps_min = c.eps.back();
  ReplaceDiscResult rd =
      replace_disc(g1.mesh, g1.default_center, std::min(1.1 * std::sqrt(eps_max), 1.0),
                   c.k_boundary, 0.9, 0.4 * 2 * kPi * eps_min / c.k_boundary);
  setup.o1 = rd.mesh;
  setup.p1 = rd.center;

  CollapseResult res = collapse_sweep(setup, c.eps, threads);

  std::ofstream csv(art.dir / "results.csv");
  csv << "eps,j,lambda_glued,lambda_ref,gap,delta_eps,transplant_quotient,transplant_bound,"
         "trace_value\n";
  for (const auto& rec : res.records)
    for (int j = 0; j <= c.k; ++j) {
      csv << csv_num(rec.epsilon) << "," << j << "," << csv_num(rec.lambda_glued[j]) << ","
          << csv_num(rec.lambda_ref[j]) << "," << csv_num(rec.gaps[j]) << ","
          << csv_num(rec.bound.delta_value) << ",";
      csv << csv_num(j < static_cast<int>(rec.transplant.quotients.size())
                         ? rec.transplant.quotients[j]
                         : 0.0)
          << ",";
      csv << csv_num(j < static_cast<int>(rec.transplant.bounds.size()) ? rec.transplant.bounds[j]
                                                                        : 0.0)
          << ",";
      csv << csv_num(j < static_cast<int>(rec.trace.size()) ? rec.trace[j] : 0.0) << "\n";
    }

  for (const auto& rec : res.records)
    art.check(rec.solver_converged,
              "solver converged at eps=" + std::to_string(rec.epsilon));

  // gaps non-increasing within 10% slack, final gap small
  for (int j = 0; j <= c.k; ++j) {
    double ref = res.reference.eigenvalues[j];
    bool trend = true;
    for (size_t i = 1; i < res.records.size(); ++i)
      if (res.records[i].gaps[j] >
          1.1 * res.records[i - 1].gaps[j] + 1e-6 * std::max(1.0, ref))
        trend = false;
    art.check(trend, "gap trend non-increasing for j=" + std::to_string(j));
    double final_gap = res.records.back().gaps[j];
    bool small = ref < 1.0 ? final_gap <= 0.1 : final_gap <= 0.1 * ref;
    art.check(small, "final gap within 10% for j=" + std::to_string(j));
  }
  // transplant inequality at every eps (2% slack) and delta monotone
  for (const auto& rec : res.records) {
    bool ineq = true;
    for (size_t j = 0; j < rec.transplant.quotients.size(); ++j)
      if (rec.transplant.quotients[j] > rec.transplant.bounds[j] * 1.02) ineq = false;
    art.check(ineq, "transplant quotients below lambda_j + delta at eps=" +
                        std::to_string(rec.epsilon));
  }
  art.check(res.records.back().bound.delta_value < res.records.front().bound.delta_value,
            "delta(eps) smaller at the final eps than at the first");
  // trace decay endpoints with 10% slack
  if (!res.records.empty() && !res.records.front().trace.empty()) {
    bool decay = true;
    const auto& first = res.records.front().trace;
    const auto& last = res.records.back().trace;
    for (size_t j = 0; j < std::min(first.size(), last.size()); ++j)
      if (last[j] > 1.1 * first[j] + 1e-9) decay = false;
    art.check(decay, "interface trace decays from the largest to the smallest eps");
  }

  std::vector<Series> series;
  for (int j = 0; j <= c.k; ++j) {
    Series s;
    s.name = "j=" + std::to_string(j);
    for (const auto& rec : res.records) s.points.push_back({rec.epsilon, rec.gaps[j]});
    series.push_back(std::move(s));
  }
  write_svg_loglog((art.dir / "plot.svg").string(), "eigenvalue gaps vs eps", series);

  art.manifest["o1_mesh_hash"] = fnv1a64(write_mesh(setup.o1));
  art.manifest["o2_mesh_hash"] = fnv1a64(write_mesh(setup.o2));
  json dofs = json::array();
  for (const auto& rec : res.records) dofs.push_back(rec.dofs);
  art.manifest["dofs_per_eps"] = dofs;
  return 0;
}

int run_continuity(const RunConfig& c, Artifacts& art, const SolveOptions& opts) {
  BuiltGeometry geo = build_geometry(c.o1);
  MetricField base = geo.metric.materialize(geo.mesh);
  AssembledSystem base_sys = assemble(geo.mesh, base);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(-c.rho_max, c.rho_max);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi);

  std::ofstream csv(art.dir / "results.csv");
  csv << "trial,rho,ratio_min,ratio_max,inside\n";
  bool all_inside = true;
  double worst_rho = 0;
  for (int trial = 0; trial < c.trials; ++trial) {
    MetricField pert = base;
    pert.base.resize(base.size());
    for (int t = 0; t < base.size(); ++t) {
      double s1 = uni(rng), s2 = uni(rng), a = ang(rng);
      Eigen::Matrix2d Q;
      Q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      Eigen::Vector2d ex(std::exp(s1), std::exp(s2));
      Eigen::Matrix2d E = Q * ex.asDiagonal() * Q.transpose();
      // G' = G^{1/2} E G^{1/2}: pointwise rho'' = max |s_i| <= rho_max
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(base.at(t));
      Eigen::Matrix2d sq = es.operatorSqrt();
      pert.base[t] = sq * E * sq;
    }
    pert.factor = 1.0;
    double rho = rho_double_prime(base, pert).rho_pp;
    worst_rho = std::max(worst_rho, rho);
    ContinuityCheckReport rep = continuity_check(base_sys, assemble(geo.mesh, pert), c.rho_max,
                                                 c.k, opts);
    csv << trial << "," << csv_num(rho) << "," << csv_num(rep.worst_low) << ","
        << csv_num(rep.worst_high) << "," << (rep.inside_envelope ? 1 : 0) << "\n";
    if (!rep.inside_envelope) all_inside = false;
  }
  art.check(worst_rho <= c.rho_max * (1 + 1e-9), "perturbations stay within rho_max");
  art.check(all_inside, "all random-perturbation ratios inside exp(+-3 rho_max)");

  for (double cfac : c.scaling_cases) {
    AssembledSystem scaled_sys = assemble(geo.mesh, scale(base, cfac));
    double delta = std::abs(std::log(cfac));
    ContinuityCheckReport rep = continuity_check(base_sys, scaled_sys, delta, c.k, opts);
    bool exact = true;
    for (double r : rep.ratios)
      if (std::abs(r - cfac) > 1e-6 * cfac) exact = false;
    art.check(rep.inside_envelope && exact,
              "exact-scaling case c=" + std::to_string(cfac) + " inside envelope");
  }
  art.manifest["dofs"] = base_sys.n;
  return 0;
}

int run_smooth_approx(const RunConfig& c, Artifacts& art, const SolveOptions& opts) {
  BuiltGeometry g1 = build_geometry(c.o1);
  BuiltGeometry g2 = build_geometry(c.o2);
  OrbiMesh o1 = resolve_disc(g1.mesh, g1.default_center, c.sa_eps, c.k_boundary);

  AssembledSystem o1sys = assemble(o1, g1.metric.materialize(o1));
  SpectrumResult ref = solve_smallest(o1sys, c.k, opts);

  ConnectedSumConfig cfg;
  cfg.epsilon = c.sa_eps;
  cfg.p1 = g1.default_center;
  cfg.p2 = g2.default_center;
  cfg.k_boundary = c.k_boundary;
  GluedComplex gc = build_connected_sum({o1, g1.metric}, {g2.mesh, g2.metric}, cfg);
  AssembledSystem sys = assemble_glued(gc);
  SpectrumResult glued = solve_smallest(sys, c.k, opts);

  std::vector<double> widths = c.widths;
  if (widths.empty())
    widths = {0.8 * c.sa_eps, 0.4 * c.sa_eps, 0.2 * c.sa_eps};
  std::vector<double> lref(ref.eigenvalues.data(), ref.eigenvalues.data() + c.k + 1);
  auto records = smooth_approx_check(gc, glued, lref, widths, c.k, opts);

  std::ofstream csv(art.dir / "results.csv");
  csv << "width,delta_w,j,lambda_mollified,lambda_glued,lambda_ref,envelope_ok\n";
  for (const auto& rec : records)
    for (int j = 0; j <= c.k; ++j)
      csv << csv_num(rec.width) << "," << csv_num(rec.delta_w) << "," << j << ","
          << csv_num(rec.lambda_mollified[j]) << "," << csv_num(glued.eigenvalues[j]) << ","
          << csv_num(lref[j]) << "," << (rec.envelope_ok ? 1 : 0) << "\n";

  bool mono = true;
  for (size_t i = 1; i < records.size(); ++i)
    if (records[i].delta_w > records[i - 1].delta_w * (1 + 1e-9)) mono = false;
  art.check(mono, "delta_w non-increasing as the width shrinks");
  bool env = true;
  for (const auto& rec : records) env = env && rec.envelope_ok;
  art.check(env, "mollified spectra satisfy the continuity envelope");
  art.manifest["dofs"] = sys.n;
  return 0;
}

}  // namespace

int run_experiment(const RunConfig& config, const RunOverrides& overrides) {
  Artifacts art;
  art.dir = overrides.out_dir.value_or(config.output);
  std::error_code ec;
  fs::create_directories(art.dir, ec);
  if (!fs::is_directory(art.dir)) {
    std::cout << "ERROR schema: output directory '" << art.dir.string() << "' is not writable\n";
    return 2;
  }
  SolveOptions opts;
  opts.tol = config.solver_tol;
  opts.seed = overrides.seed.value_or(config.seed);

  art.manifest["config"] = config_json(config);
  art.manifest["resolved_seed"] = opts.seed;
  art.manifest["threads"] = overrides.threads;

  try {
    if (config.experiment == "validate")
      run_validate(config, art, opts);
    else if (config.experiment == "spectrum")
      run_spectrum(config, art, opts);
    else if (config.experiment == "collapse")
      run_collapse(config, art, opts, overrides.threads);
    else if (config.experiment == "continuity")
      run_continuity(config, art, opts);
    else if (config.experiment == "smooth-approx")
      run_smooth_approx(config, art, opts);
  } catch (const std::exception& e) {
    std::cout << "ERROR numerical: " << e.what() << "\n";
    art.manifest["error"] = e.what();
    art.finish();
    return 3;
  }
  art.finish();
  if (!art.pass) {
    std::cout << "ERROR assertion: one or more experiment assertions failed\n";
    return 1;
  }
  return 0;
}

std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os << "experiment: " << c.experiment << "\n";
  os << "k: " << c.k << ", seed: " << c.seed << ", solver_tol: " << c.solver_tol << "\n";
  auto geo = [&](const GeometrySpec& g, const char* name) {
    os << name << ": " << g.kind << " (side " << g.side << ", h " << g.h;
    if (g.kind == "pillowcase") os << ", grading " << g.grading;
    if (g.kind == "spindle") os << ", m " << g.m;
    if (g.kind == "spindle" || g.kind == "sphere" || g.kind == "capped-sphere")
      os << ", radius " << g.radius;
    os << ")";
    double est = 0;
    if (g.kind == "torus")
      est = std::pow(std::ceil(g.side / g.h), 2);
    else if (g.kind == "pillowcase")
      est = std::pow(std::ceil(g.side / g.h), 2) / 2 + 2;
    else
      est = 2 + 2 * kPi * kPi / (g.m * g.h * g.h) / 2;
    os << ", estimated vertices ~" << static_cast<long long>(est) << "\n";
  };
  geo(c.o1, "o1");
  if (c.experiment == "collapse" || c.experiment == "smooth-approx") geo(c.o2, "o2");
  if (c.experiment == "collapse") {
    os << "eps:";
    for (double e : c.eps) os << " " << e;
    os << "\nassertions: gaps non-increasing (10% slack) and final gap <= 10% for j <= " << c.k
       << "; transplant quotients <= lambda_j + delta (2% slack); delta decreasing; "
          "interface trace decay (10% slack)\n";
  } else if (c.experiment == "validate") {
    os << "oracle count: " << c.validate_count << ", tolerance " << c.oracle_rel
       << (c.rate_check ? ", refinement rate >= 1.8" : "") << "\n";
  } else if (c.experiment == "continuity") {
    os << "trials: " << c.trials << ", rho_max " << c.rho_max
       << "; assertions: ratios inside exp(+-3 rho) for j <= " << c.k << "\n";
  } else if (c.experiment == "smooth-approx") {
    os << "eps " << c.sa_eps << ", widths:";
    if (c.widths.empty())
      os << " (default three halvings)";
    else
      for (double w : c.widths) os << " " << w;
    os << "\nassertions: delta_w non-increasing; continuity envelope for j <= " << c.k << "\n";
  }
  return os.str();
}

}  // namespace orbi
