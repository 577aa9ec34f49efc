#include "segal/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace segal {

namespace {

constexpr std::int64_t kMaterializeCap = 100'000;

ValidationStatus fail(ErrorCode code, std::string msg) { return {false, code, std::move(msg)}; }

bool same_tail(const TailFamily& a, const TailFamily& b) {
  return a.kind == b.kind && a.params == b.params;
}

// Head of each tail branch as atoms, plus the trace left unmaterialized.
double materialize(const TailFamily& t, std::vector<Atom>& atoms, const SeriesSettings& s) {
  NeumaierSum rest;
  for (const auto& b : t.branches) {
    BranchWalker w(b);
    for (; w.n() - b.n0 < kMaterializeCap; w.next()) {
      if (w.log_value() > 700.0 || w.log_weight() < -700.0) break;
      atoms.push_back({std::exp(w.log_value()), std::exp(w.log_weight())});
    }
    rest.add(branch_sum(b, Functional::trace(), w.n(), s).value);
  }
  return rest.value();
}

}  // namespace

SpectralDensity make_density(std::vector<Atom> atoms, TailFamily tail, double total_algebra_trace) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  std::vector<Atom> merged;
  for (const Atom& a : atoms) {
    if (!merged.empty() && merged.back().value == a.value)
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }
  return {std::move(merged), std::move(tail), total_algebra_trace};
}

ValidationStatus validate(const SpectralDensity& d, const SeriesSettings& s) {
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    const Atom& a = d.atoms[i];
    if (std::isnan(a.value) || a.value < 0.0) return fail(ErrorCode::negative_value, "atom value < 0");
    if (!std::isfinite(a.value)) return fail(ErrorCode::trace_divergence, "atom value is infinite");
    if (!(a.weight > 0.0)) return fail(ErrorCode::nonpositive_weight, "atom weight <= 0");
    if (!std::isfinite(a.weight)) return fail(ErrorCode::nonpositive_weight, "atom weight is infinite");
    if (i > 0) {
      if (d.atoms[i - 1].value == a.value)
        return fail(ErrorCode::duplicate_values, "repeated atom value");
      if (d.atoms[i - 1].value > a.value)
        return fail(ErrorCode::invalid_argument, "atoms not in ascending order");
    }
  }
  if (!(d.total_algebra_trace > 0.0))
    return fail(ErrorCode::invalid_argument, "total algebra trace must be positive");
  NeumaierSum head;
  for (const Atom& a : d.atoms) head.add(a.value * a.weight);
  if (!std::isfinite(head.value())) return fail(ErrorCode::trace_divergence, "atom trace overflows");
  double weight = 0.0;
  for (const Atom& a : d.atoms) weight += a.weight;
  if (!d.tail.empty()) {
    try {
      const double t = tail_sum(d.tail, Functional::trace(), s).value;
      if (!std::isfinite(t)) return fail(ErrorCode::trace_divergence, "tail trace diverges");
      const double declared = d.tail.declared_trace;
      if (!(std::abs(declared - t) <= 1e-9 * (1.0 + std::abs(t))))
        return fail(ErrorCode::declaration_mismatch, "declared_trace disagrees with the family");
      const Verdict v = tail_entropy(d.tail, s).verdict();
      if (v != d.tail.declared_class)
        return fail(ErrorCode::declaration_mismatch,
                    std::string("declared entropy class ") + to_string(d.tail.declared_class) +
                        ", family verdict " + to_string(v));
      if (std::isfinite(d.total_algebra_trace))
        weight += tail_sum(d.tail, Functional::mass(), s).value;
    } catch (const LabError& e) {
      return fail(e.code(), e.what());
    }
  } else if (!d.tail.branches.empty()) {
    return fail(ErrorCode::invalid_argument, "tail kind none carries branches");
  }
  if (weight > d.total_algebra_trace * (1.0 + 1e-12) + 1e-12)
    return fail(ErrorCode::algebra_trace_exceeded, "weights exceed the algebra trace");
  return {};
}

void require_valid(const SpectralDensity& d, const SeriesSettings& s) {
  const ValidationStatus v = validate(d, s);
  if (!v.ok) throw LabError(v.code, v.message);
}

double trace(const SpectralDensity& d, const SeriesSettings& s) {
  NeumaierSum sum;
  for (const Atom& a : d.atoms) sum.add(a.value * a.weight);
  if (!d.tail.empty()) {
    const double t = tail_sum(d.tail, Functional::trace(), s).value;
    if (std::isinf(t)) return t;
    sum.add(t);
  }
  return sum.value();
}

double total_weight(const SpectralDensity& d, const SeriesSettings& s) {
  NeumaierSum sum;
  for (const Atom& a : d.atoms) sum.add(a.weight);
  if (!d.tail.empty()) {
    const double t = tail_sum(d.tail, Functional::mass(), s).value;
    if (std::isinf(t)) return t;
    sum.add(t);
  }
  return sum.value();
}

double trace_below(const SpectralDensity& d, double x, const SeriesSettings& s) {
  NeumaierSum sum;
  for (const Atom& a : d.atoms)
    if (a.value < x) sum.add(a.value * a.weight);
  if (!d.tail.empty()) sum.add(tail_region_sum(d.tail, Functional::trace(), 0.0, true, x, false, s).value);
  return sum.value();
}

double trace_above(const SpectralDensity& d, double x, const SeriesSettings& s) {
  NeumaierSum sum;
  for (const Atom& a : d.atoms)
    if (a.value > x) sum.add(a.value * a.weight);
  if (!d.tail.empty())
    sum.add(tail_region_sum(d.tail, Functional::trace(), x, false, kInf, false, s).value);
  return sum.value();
}

double weight_at_or_above(const SpectralDensity& d, double x, const SeriesSettings& s) {
  NeumaierSum sum;
  for (const Atom& a : d.atoms)
    if (a.value >= x) sum.add(a.weight);
  if (!d.tail.empty()) {
    const double t = tail_region_sum(d.tail, Functional::mass(), x, true, kInf, false, s).value;
    if (std::isinf(t)) return t;
    sum.add(t);
  }
  return sum.value();
}

double l1_distance(const SpectralDensity& d1, const SpectralDensity& d2, const SeriesSettings& s) {
  std::vector<Atom> a1 = d1.atoms;
  std::vector<Atom> a2 = d2.atoms;
  NeumaierSum cost;
  if (!d1.tail.empty() && !d2.tail.empty()) {
    if (!same_tail(d1.tail, d2.tail))
      throw LabError(ErrorCode::not_alignable, "the two tails do not share a grid");
  } else if (!d1.tail.empty()) {
    cost.add(materialize(d1.tail, a1, s));
  } else if (!d2.tail.empty()) {
    cost.add(materialize(d2.tail, a2, s));
  }
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> classes;
  for (const Atom& a : a1) classes[a.weight].first.push_back(a.value);
  for (const Atom& a : a2) classes[a.weight].second.push_back(a.value);
  for (auto& [w, pair] : classes) {
    auto& [x, y] = pair;
    std::sort(x.begin(), x.end(), std::greater<>());
    std::sort(y.begin(), y.end(), std::greater<>());
    const std::size_t n = std::max(x.size(), y.size());
    x.resize(n, 0.0);
    y.resize(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) cost.add(std::abs(x[i] - y[i]) * w);
  }
  return cost.value();
}

SpectralDensity truncate(const SpectralDensity& d, double m, double M, const SeriesSettings& s) {
  if (!(m > 0.0 && m < M))
    throw LabError(ErrorCode::invalid_argument, "truncate needs 0 < m < M");
  std::vector<Atom> kept;
  for (const Atom& a : d.atoms)
    if (a.value >= m && a.value <= M) kept.push_back(a);
  std::vector<TailBranch> branches;
  const double lm = std::log(m);
  const double lM = std::log(M);
  for (const auto& b : d.tail.branches) {
    const Settle lo = settle(b, m, s);
    const Settle hi = settle(b, M, s);
    const std::int64_t end = std::max({b.n0, lo.index, hi.index});
    if (end - b.n0 > s.max_head)
      throw LabError(ErrorCode::unsupported, "truncation band reaches too far into the tail");
    BranchWalker w(b);
    for (; w.n() < end; w.next())
      if (w.log_value() >= lm && w.log_value() <= lM)
        kept.push_back({std::exp(w.log_value()), std::exp(w.log_weight())});
    if (lo.side != Side::below && hi.side != Side::above) {
      TailBranch rest = b;
      rest.n0 = end;
      branches.push_back(rest);
    }
  }
  TailFamily tail;
  if (!branches.empty()) tail = custom_tail(std::move(branches));
  return make_density(std::move(kept), std::move(tail), d.total_algebra_trace);
}

SpectralDensity scale(const SpectralDensity& d, double alpha) {
  if (!(alpha > 0.0 && std::isfinite(alpha)))
    throw LabError(ErrorCode::invalid_argument, "scale factor must be positive");
  SpectralDensity out = d;
  for (Atom& a : out.atoms) a.value *= alpha;
  out.tail = scale_tail(d.tail, alpha);
  return out;
}

SpectralDensity shift_plus_identity(const SpectralDensity& d, const SeriesSettings& s) {
  if (!std::isfinite(d.total_algebra_trace))
    throw LabError(ErrorCode::infinite_trace, "h + 1 needs a finite algebra");
  const double used = total_weight(d, s);
  if (used > d.total_algebra_trace * (1.0 + 1e-12) + 1e-12)
    throw LabError(ErrorCode::algebra_trace_exceeded, "weights exceed the algebra trace");
  std::vector<Atom> atoms;
  for (const Atom& a : d.atoms) atoms.push_back({a.value + 1.0, a.weight});
  const double zero_mass = d.total_algebra_trace - used;
  if (zero_mass > 1e-12 * d.total_algebra_trace) atoms.push_back({1.0, zero_mass});
  return make_density(std::move(atoms), offset_tail(d.tail, 1.0), d.total_algebra_trace);
}

}  // namespace segal
