#pragma once

#include "orbispec/csum.hpp"
#include "orbispec/metric.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace orbi {

// Structured text format. Integer fields round-trip exactly; coordinates
// are written with 17 significant digits and round-trip bit for bit.
std::string write_mesh(const OrbiMesh& mesh);
OrbiMesh read_mesh(std::istream& in);
OrbiMesh read_mesh_string(const std::string& text);

// METRIC section (triangle a11 a12 a22), appended after a mesh block.
std::string write_metric(const MetricField& field);
MetricField read_metric(std::istream& in);

std::string write_complex(const GluedComplex& gc);
GluedComplex read_complex(std::istream& in);
GluedComplex read_complex_string(const std::string& text);

std::uint64_t fnv1a64(const std::string& data);

std::string format_double(double v);  // %.17g

}  // namespace orbi
