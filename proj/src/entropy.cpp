#include "segal/entropy.hpp"

#include <cmath>

namespace segal {

EntropyReport entropy(const SpectralDensity& d, const SeriesSettings& s) {
  EntropyReport r;
  // The tail's analytic verdict comes first; the finite head can only shift
  // a finite value.
  if (!d.tail.empty()) r.value = tail_entropy(d.tail, s, &r.partial_sum_cutoff);
  NeumaierSum pos, neg;
  for (const Atom& a : d.atoms) {
    const double v = xlogx(a.value) * a.weight;
    (v > 0.0 ? pos : neg).add(v);
  }
  r.value.positive_part += pos.value();
  r.value.negative_part += neg.value();
  r.trace = trace(d, s);
  if (std::isfinite(d.total_algebra_trace)) {
    r.lower_bound_check = r.trace - d.total_algebra_trace;
    NeumaierSum used;
    for (const Atom& a : d.atoms)
      if (a.value > 0.0) used.add(a.weight);
    if (!d.tail.empty()) used.add(tail_sum(d.tail, Functional::mass(), s).value);
    r.zero_mass = d.total_algebra_trace - used.value();
  }
  return r;
}

ScaleLaw entropy_scale_law(const SpectralDensity& d, double alpha, const SeriesSettings& s) {
  const EntropyReport base = entropy(d, s);
  if (!base.value.is_finite())
    throw LabError(ErrorCode::not_finite, "scaling law needs a finite entropy");
  ScaleLaw out;
  out.lhs = entropy(scale(d, alpha), s).value;
  out.rhs = ExtendedEntropyValue::finite(alpha * std::log(alpha) * base.trace +
                                         alpha * base.value.value());
  return out;
}

ShiftEquivalence shift_equivalence(const SpectralDensity& d, const SeriesSettings& s) {
  ShiftEquivalence out;
  out.h = entropy(d, s).value;
  out.h_plus_one = entropy(shift_plus_identity(d, s), s).value;
  out.both_finite_agree = out.h.is_finite() == out.h_plus_one.is_finite();
  return out;
}

ExtendedEntropyValue von_neumann_entropy(const SpectralDensity& d, const SeriesSettings& s) {
  return -entropy(d, s).value;
}

}  // namespace segal
