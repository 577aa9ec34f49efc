#pragma once

#include <optional>

#include "segal/spectral.hpp"

namespace segal {

struct EntropyReport {
  ExtendedEntropyValue value;
  double trace = 0.0;
  std::optional<double> lower_bound_check;  // tau(h) - tau(1) on a finite algebra
  std::int64_t partial_sum_cutoff = 0;      // tail terms summed directly
  double zero_mass = kInf;                  // tau(e({0})); +inf on an infinite algebra
};

/// H(h) = tau(h log h) with 0 log 0 = 0, split at t = 1.
EntropyReport entropy(const SpectralDensity& d, const SeriesSettings& s = {});

struct ScaleLaw {
  ExtendedEntropyValue lhs;  // H(alpha h)
  ExtendedEntropyValue rhs;  // alpha log alpha tau(h) + alpha H(h)
};
ScaleLaw entropy_scale_law(const SpectralDensity& d, double alpha, const SeriesSettings& s = {});

struct ShiftEquivalence {
  ExtendedEntropyValue h;
  ExtendedEntropyValue h_plus_one;
  bool both_finite_agree = true;
};
ShiftEquivalence shift_equivalence(const SpectralDensity& d, const SeriesSettings& s = {});

/// S(h) = -H(h).
ExtendedEntropyValue von_neumann_entropy(const SpectralDensity& d, const SeriesSettings& s = {});

}  // namespace segal
