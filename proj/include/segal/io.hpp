#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "segal/matrix_model.hpp"
#include "segal/semicontinuity.hpp"

namespace segal {

/// %.<digits>g with "inf", "-inf", "nan" spelled out.
std::string format_number(double x, int digits = 12);

// Spectral-density text format:
//   # comment
//   !trace <value|inf>
//   !tail <family> key=value ... declared_trace=<v> declared_entropy=<verdict>
//   <t>\t<w>
// Atoms are sorted but never merged, so repeated values reach validation.
SpectralDensity parse_density(std::istream& in, const std::string& origin = "<input>");
SpectralDensity read_density(const std::string& path);
/// Full-precision round trip; `header` lines are written as comments.
void write_density(std::ostream& out, const SpectralDensity& d, const std::string& header = "");
void write_density(const std::string& path, const SpectralDensity& d, const std::string& header = "");

// Experiment format: a spectral density preceded by one line
//   !experiment name=.. mode=upper|lower|lower_finite epsilon=.. c=auto|<v>
//               sequence=constant|additive|multiplicative a=.. p=.. nmax=..
//               m=<list> M=<list>
ExperimentSpec parse_experiment(std::istream& in, const std::string& origin = "<input>");
ExperimentSpec read_experiment(const std::string& path);

// Matrix format: per block a line `!algebra dim=<d> weight=<mu>` followed by
// d*d row-major entries a+bi.
struct MatrixInput {
  WeightedMatrixAlgebra algebra;
  Element element;
};
MatrixInput parse_matrix(std::istream& in, const std::string& origin = "<input>");
MatrixInput read_matrix(const std::string& path);
void write_matrix(std::ostream& out, const WeightedMatrixAlgebra& A, const Element& x);

}  // namespace segal
