#include "segal/semicontinuity.hpp"

#include <cmath>

#include "segal/parallel.hpp"

namespace segal {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double softplus(double x) { return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// psi(x) = eps x - log log(1 + e^x) >= 0  <=>  u^eps >= log(1+u) at u = e^x.
// psi is convex: psi' = eps - sigmoid(x)/softplus(x) and the ratio decreases.
double psi(double eps, double x) { return eps * x - std::log(softplus(x)); }
double psi_slope(double eps, double x) { return eps - sigmoid(x) / softplus(x); }

double value_entropy(const SpectralDensity& d) { return entropy(d).value.value(); }

}  // namespace

double r_eps(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw LabError(ErrorCode::invalid_argument, "r_eps needs 0 < eps <= 1");
  if (eps >= 1.0) return 0.0;
  // minimum of psi
  double lo = -60.0;
  double hi = 1.0;
  while (psi_slope(eps, hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (psi_slope(eps, mid) < 0.0 ? lo : hi) = mid;
  }
  const double x_min = hi;
  if (psi(eps, x_min) >= 0.0) return 0.0;
  // largest root lies right of the minimum; keep psi(hi) >= 0
  lo = x_min;
  hi = x_min + 1.0;
  while (psi(eps, hi) < 0.0) hi = x_min + 2.0 * (hi - x_min);
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (psi(eps, mid) < 0.0 ? lo : hi) = mid;
  }
  return std::exp(hi);
}

double moment(const SpectralDensity& d, double p, const SeriesSettings& s) {
  if (!(p > 0.0)) throw LabError(ErrorCode::invalid_argument, "moment order must be positive");
  NeumaierSum sum;
  for (const Atom& a : d.atoms) sum.add(std::pow(a.value, p) * a.weight);
  if (!d.tail.empty()) {
    const double t = tail_sum(d.tail, Functional::moment(p), s).value;
    if (std::isinf(t)) return t;
    sum.add(t);
  }
  return sum.value();
}

BoundCheckRow tail_mass_inequality_check(const SpectralDensity& d, double a, double eps,
                                         const SeriesSettings& s) {
  if (!(a > 0.0) || !(eps > 0.0 && eps < 1.0))
    throw LabError(ErrorCode::invalid_argument, "tail mass check needs a > 0 and 0 < eps < 1");
  BoundCheckRow row;
  row.lhs = std::pow(a, 1.0 - eps) * weight_at_or_above(d, a, s);
  row.rhs = moment(d, 1.0 - eps, s);
  row.slack = row.rhs - row.lhs;
  return row;
}

const char* to_string(SemicontinuityMode m) {
  switch (m) {
    case SemicontinuityMode::upper:
      return "upper";
    case SemicontinuityMode::lower:
      return "lower";
    case SemicontinuityMode::lower_finite:
      return "lower_finite";
  }
  return "?";
}

bool parse_mode(const std::string& text, SemicontinuityMode& out) {
  for (auto m : {SemicontinuityMode::upper, SemicontinuityMode::lower, SemicontinuityMode::lower_finite})
    if (text == to_string(m)) {
      out = m;
      return true;
    }
  return false;
}

const char* to_string(SequenceRule::Kind k) {
  switch (k) {
    case SequenceRule::Kind::constant:
      return "constant";
    case SequenceRule::Kind::additive:
      return "additive";
    case SequenceRule::Kind::multiplicative:
      return "multiplicative";
  }
  return "?";
}

bool parse_sequence_kind(const std::string& text, SequenceRule::Kind& out) {
  for (auto k : {SequenceRule::Kind::constant, SequenceRule::Kind::additive,
                 SequenceRule::Kind::multiplicative})
    if (text == to_string(k)) {
      out = k;
      return true;
    }
  return false;
}

SemicontinuityExperiment::SemicontinuityExperiment(ExperimentSpec spec) : spec_(std::move(spec)) {
  if (!(spec_.epsilon > 0.0 && spec_.epsilon < 1.0))
    throw LabError(ErrorCode::invalid_argument, "epsilon must lie in (0, 1)");
  if (spec_.n_max < 1) throw LabError(ErrorCode::invalid_argument, "n_max must be at least 1");
  if (!spec_.h0.tail.empty())
    throw LabError(ErrorCode::unsupported, "experiment sequences are built from atoms only");
  if (spec_.ms.empty() || spec_.Ms.empty()) throw LabError(ErrorCode::invalid_argument, "empty (m, M) grid");
  for (double m : spec_.ms)
    for (double M : spec_.Ms) {
      RegularizationParams(m, M).check();
      if (spec_.mode != SemicontinuityMode::upper && M < 1.0)
        throw LabError(ErrorCode::precondition, "the lower bound chains need M >= 1");
    }
  if (spec_.mode == SemicontinuityMode::lower_finite && !std::isfinite(spec_.h0.total_algebra_trace))
    throw LabError(ErrorCode::infinite_trace, "lower_finite needs a finite algebra");
  require_valid(spec_.h0);
  r_ = r_eps(spec_.epsilon);

  const double p = spec_.mode == SemicontinuityMode::upper ? 1.0 + spec_.epsilon : 1.0 - spec_.epsilon;
  max_moment_ = moment(spec_.h0, p);
  for (std::int64_t n = 1; n <= spec_.n_max; ++n) {
    const SpectralDensity hn = h(n);
    require_valid(hn);
    max_moment_ = std::max(max_moment_, moment(hn, p));
  }
  c_ = spec_.c.value_or(max_moment_);
  if (spec_.mode != SemicontinuityMode::lower_finite && max_moment_ > c_ * (1.0 + 1e-12))
    throw LabError(ErrorCode::moment_violation, "a generated element exceeds the moment bound c");

  for (int k = 0; k <= 12; ++k) {
    const auto n = static_cast<std::int64_t>(std::llround(std::pow(10.0, k)));
    if (l1_distance(h(n), spec_.h0) < 1e-6) {
      converged_at_ = n;
      break;
    }
  }
}

SpectralDensity SemicontinuityExperiment::h(std::int64_t n) const {
  const SequenceRule& rule = spec_.sequence;
  const double step = rule.a * std::pow(static_cast<double>(n), -rule.p);
  std::vector<Atom> atoms = spec_.h0.atoms;
  for (Atom& a : atoms) {
    switch (rule.kind) {
      case SequenceRule::Kind::constant:
        break;
      case SequenceRule::Kind::additive:
        a.value += step;
        break;
      case SequenceRule::Kind::multiplicative:
        a.value *= 1.0 + step;
        break;
    }
    if (a.value < 0.0) throw LabError(ErrorCode::negative_value, "sequence rule produced a negative value");
  }
  // keep atoms on the grid of h0 even if two values meet
  SpectralDensity out;
  out.atoms = std::move(atoms);
  out.total_algebra_trace = spec_.h0.total_algebra_trace;
  return out;
}

BoundCheckRow usc_bound_check(const SemicontinuityExperiment& x, double m, double M, std::int64_t n) {
  if (x.mode() != SemicontinuityMode::upper)
    throw LabError(ErrorCode::precondition, "usc check needs an upper experiment");
  const RegularizationParams p(m, M);
  const SpectralDensity hn = x.h(n);
  const double eps = x.epsilon();
  BoundCheckRow row{m, M, n};
  row.lhs = value_entropy(hn);
  // tau(f_mM(h_n) - f_mM(h0)) + tau(f_mM(h0)) collapses to tau(f_mM(h_n))
  row.rhs = std::log1p(m) * trace(hn) + x.c() * (std::pow(x.r(), 1.0 - eps) + 1.0) / std::pow(M, eps) +
            tau_f_mM(hn, p);
  row.slack = row.rhs - row.lhs;
  return row;
}

namespace {

BoundCheckRow lower_chain(const SemicontinuityExperiment& x, double m, double M, std::int64_t n,
                          double small_spectrum_term) {
  const RegularizationParams p(m, M);
  const SpectralDensity hn = x.h(n);
  const double tn = trace(hn);
  BoundCheckRow row{m, M, n};
  row.lhs = value_entropy(hn);
  row.rhs = -small_spectrum_term + std::log1p(m) * tn - 2.0 * kLn2 / (M + 1.0) * tn + tau_f_mM(hn, p);
  row.slack = row.lhs - row.rhs;
  return row;
}

}  // namespace

BoundCheckRow lsc_bound_check(const SemicontinuityExperiment& x, double m, double M, std::int64_t n) {
  if (x.mode() != SemicontinuityMode::lower)
    throw LabError(ErrorCode::precondition, "lsc check needs a lower experiment");
  const double eps = x.epsilon();
  return lower_chain(x, m, M, n, x.c() * (1.0 + std::pow(x.r(), 1.0 - eps)) * std::pow(m, eps));
}

BoundCheckRow lsc_finite_bound_check(const SemicontinuityExperiment& x, double m, double M,
                                     std::int64_t n) {
  if (x.mode() != SemicontinuityMode::lower_finite)
    throw LabError(ErrorCode::precondition, "finite lsc check needs a lower_finite experiment");
  // tau(h log(m + h) - h log h) <= m tau(supp h) <= m T
  return lower_chain(x, m, M, n, m * x.h0().total_algebra_trace);
}

BoundCheckRow bound_check(const SemicontinuityExperiment& x, double m, double M, std::int64_t n) {
  switch (x.mode()) {
    case SemicontinuityMode::upper:
      return usc_bound_check(x, m, M, n);
    case SemicontinuityMode::lower:
      return lsc_bound_check(x, m, M, n);
    case SemicontinuityMode::lower_finite:
      return lsc_finite_bound_check(x, m, M, n);
  }
  return {};
}

std::vector<BoundCheckRow> run_experiment(const SemicontinuityExperiment& x) {
  const auto& ms = x.spec().ms;
  const auto& Ms = x.spec().Ms;
  const std::int64_t N = x.n_max();
  std::vector<BoundCheckRow> rows(ms.size() * Ms.size() * static_cast<std::size_t>(N));
  parallel_for(ms.size() * Ms.size(), [&](std::size_t cell) {
    const double m = ms[cell / Ms.size()];
    const double M = Ms[cell % Ms.size()];
    for (std::int64_t n = 1; n <= N; ++n)
      rows[cell * static_cast<std::size_t>(N) + static_cast<std::size_t>(n - 1)] = bound_check(x, m, M, n);
  });
  return rows;
}

LimitTrend limit_trend(const SemicontinuityExperiment& x, const std::vector<double>& Ms) {
  LimitTrend out;
  const SpectralDensity& h0 = x.h0();
  out.H0 = value_entropy(h0);
  const double t0 = trace(h0);
  const double eps = x.epsilon();
  const std::int64_t N = x.n_max();
  const bool upper = x.mode() == SemicontinuityMode::upper;
  double observed = upper ? -kInf : kInf;
  for (std::int64_t n = std::max<std::int64_t>(1, N / 2); n <= N; ++n) {
    const double v = value_entropy(x.h(n));
    observed = upper ? std::max(observed, v) : std::min(observed, v);
  }
  for (double M : Ms) {
    const double m = 1.0 / M;
    const double tf = tau_f_mM(h0, RegularizationParams(m, M));
    double bound;
    if (upper) {
      bound = std::log1p(m) * t0 + x.c() * (std::pow(x.r(), 1.0 - eps) + 1.0) / std::pow(M, eps) + tf;
    } else {
      const double small = x.mode() == SemicontinuityMode::lower
                               ? x.c() * (1.0 + std::pow(x.r(), 1.0 - eps)) * std::pow(m, eps)
                               : m * h0.total_algebra_trace;
      bound = -small + std::log1p(m) * t0 - 2.0 * kLn2 / (M + 1.0) * t0 + tf;
    }
    const double delta = upper ? bound - out.H0 : out.H0 - bound;
    if (!out.rows.empty() && !(delta < out.rows.back().delta)) out.delta_decreasing = false;
    out.rows.push_back({M, observed, bound, delta});
  }
  return out;
}

double log1m_grid_check(int points) {
  double worst = kInf;
  for (int i = 0; i < points; ++i) {
    const double u = 0.5 * i / (points - 1);
    worst = std::min(worst, std::log1p(-u) + 2.0 * kLn2 * u);
  }
  return worst;
}

}  // namespace segal
