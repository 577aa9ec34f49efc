#pragma once

#include <string>
#include <vector>

#include "segal/error.hpp"
#include "segal/tail.hpp"

namespace segal {

struct Atom {
  double value;   // spectral point t >= 0
  double weight;  // tau(e({t})) > 0
};

/// Positive L1 element h = sum t e({t}) over finitely many atoms plus an
/// optional analytic tail.
struct SpectralDensity {
  std::vector<Atom> atoms;  // ascending, distinct values
  TailFamily tail;
  double total_algebra_trace = kInf;  // tau(1)
};

/// Sorts atoms and merges equal values by adding weights.
SpectralDensity make_density(std::vector<Atom> atoms, TailFamily tail = {},
                             double total_algebra_trace = kInf);

struct ValidationStatus {
  bool ok = true;
  ErrorCode code = ErrorCode::invalid_argument;
  std::string message;
};

ValidationStatus validate(const SpectralDensity& d, const SeriesSettings& s = {});
/// Throws LabError with the validation code when d is invalid.
void require_valid(const SpectralDensity& d, const SeriesSettings& s = {});

double trace(const SpectralDensity& d, const SeriesSettings& s = {});
/// sum of weights (atoms and tail); +inf for non-summable tails.
double total_weight(const SpectralDensity& d, const SeriesSettings& s = {});

/// tau(h e([0,x))) and tau(h e((x,inf))).
double trace_below(const SpectralDensity& d, double x, const SeriesSettings& s = {});
double trace_above(const SpectralDensity& d, double x, const SeriesSettings& s = {});
/// tau(e([x,inf))).
double weight_at_or_above(const SpectralDensity& d, double x, const SeriesSettings& s = {});

/// ||d1 - d2||_1 in the commuting model: atoms are paired within each weight
/// class (largest with largest, padding with zeros); identical tails cancel; a
/// tail on one side only is materialized and the rest counted as unmatched.
double l1_distance(const SpectralDensity& d1, const SpectralDensity& d2,
                   const SeriesSettings& s = {});

/// Keeps the spectrum in [m, M].
SpectralDensity truncate(const SpectralDensity& d, double m, double M, const SeriesSettings& s = {});
SpectralDensity scale(const SpectralDensity& d, double alpha);
/// h + 1 on a finite algebra; the implicit zero-spectrum mass moves to value 1.
SpectralDensity shift_plus_identity(const SpectralDensity& d, const SeriesSettings& s = {});

}  // namespace segal
