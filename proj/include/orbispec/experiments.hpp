#pragma once

#include "orbispec/analysis.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace orbi {

// Geometry descriptor used by run configs.
struct GeometrySpec {
  std::string kind;  // torus | pillowcase | sphere | spindle
  double side = 2 * 3.14159265358979323846;
  double h = 0.15;
  double grading = 1.0;
  int m = 1;
  double radius = 1.0;
};

struct BuiltGeometry {
  OrbiMesh mesh;
  MetricSpec metric;
  int default_center = -1;  // canonical excision point
  std::optional<ReferenceModel> oracle;
};

BuiltGeometry build_geometry(const GeometrySpec& spec);

struct RunConfig {
  int version = 1;
  std::string experiment;  // validate | spectrum | collapse | continuity | smooth-approx
  int k = 6;
  std::uint64_t seed = 20240229;
  std::string output = "out";
  GeometrySpec o1, o2;
  std::vector<double> eps;
  int k_boundary = 32;
  double solver_tol = 1e-8;
  double oracle_rel = 0.02;
  // validate
  int validate_count = 10;
  bool rate_check = false;
  // continuity
  int trials = 200;
  double rho_max = 0.1;
  std::vector<double> scaling_cases{0.5, 2.0};
  // smooth-approx
  double sa_eps = 0.1;
  std::vector<double> widths;
};

// Throws std::invalid_argument with a one-line reason on schema violations.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

// Exit status: 0 pass, 1 assertion failure, 2 schema violation,
// 3 numerical failure. Writes results.csv, manifest.json and, where
// applicable, plot.svg into the output directory.
int run_experiment(const RunConfig& config, const RunOverrides& overrides);

std::string describe(const RunConfig& config);

}  // namespace orbi
