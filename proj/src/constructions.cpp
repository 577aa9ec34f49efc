#include "segal/constructions.hpp"

#include <cmath>

namespace segal {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr std::int64_t kCase1Scan = 10'000'000;

TailFamily join_tails(const TailFamily& a, const TailFamily& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  std::vector<TailBranch> branches = a.branches;
  branches.insert(branches.end(), b.branches.begin(), b.branches.end());
  return custom_tail(std::move(branches));
}

double available_low_trace(const SpectralDensity& d, double m, const SeriesSettings& s) {
  if (!std::isfinite(d.total_algebra_trace)) return kInf;
  return d.total_algebra_trace - weight_at_or_above(d, m, s);
}

// Smallest n >= from with pred(n); pred is monotone in n.
template <class Pred>
std::int64_t first_index(std::int64_t from, Pred pred) {
  std::int64_t n = from;
  while (!pred(n)) {
    if (n > (std::int64_t{1} << 40))
      throw LabError(ErrorCode::unsupported, "no admissible starting index below 2^40");
    ++n;
  }
  return n;
}

}  // namespace

// ---- resolution of identity ----

ResolutionOfIdentity ResolutionOfIdentity::geometric(double beta, double gamma) {
  return {Plg::from_factors(beta, 0.0, 0.0, gamma), 1, 0};
}

double ResolutionOfIdentity::weight(std::int64_t n) const {
  if (n < n0 || (length > 0 && n >= n0 + length))
    throw LabError(ErrorCode::invalid_argument, "projection index outside the resolution");
  return std::exp(log_weight(static_cast<double>(n)));
}

double ResolutionOfIdentity::total(const SeriesSettings& s) const {
  if (length > 0) {
    NeumaierSum sum;
    for (std::int64_t n = n0; n < n0 + length; ++n) sum.add(weight(n));
    return sum.value();
  }
  if (!plg_series_converges(log_weight)) return kInf;
  const TailBranch b{PairRule{Plg{}, log_weight, 0.0}, n0};
  return branch_sum(b, Functional::mass(), n0, s).value;
}

// ---- divergent selection ----

Lemma13Sequence::Lemma13Sequence(ResolutionOfIdentity r, const SeriesSettings& s) : r_(std::move(r)) {
  if (r_.length > 0)
    throw LabError(ErrorCode::precondition, "the resolution of identity must be infinite");
  total_ = r_.total(s);
  if (!std::isfinite(total_))
    throw LabError(ErrorCode::trace_divergence, "sum of the projection traces diverges");
  branch_ = TailBranch{SelectionRule{r_.log_weight, true, 1.0, static_cast<double>(r_.n0)}, 1};
  selected_weight_ = branch_sum(branch_, Functional::mass(), 1, s).value;
}

std::int64_t Lemma13Sequence::k(std::int64_t n) const {
  BranchWalker w(branch_);
  w.advance_to(n);
  return static_cast<std::int64_t>(w.selected_index());
}

double Lemma13Sequence::lambda(std::int64_t r) const {
  if (r < r_.n0) throw LabError(ErrorCode::invalid_argument, "index outside the resolution");
  BranchWalker w(branch_);
  while (w.selected_index() < static_cast<double>(r)) w.next();
  return w.selected_index() == static_cast<double>(r) ? std::exp(w.log_value()) : 1.0;
}

double Lemma13Sequence::weighted_sum() const {
  return branch_sum(branch_, Functional::trace(), 1).value + (total_ - selected_weight_);
}

double Lemma13Sequence::divergent_partial_sum(std::int64_t N) const {
  NeumaierSum sum;
  BranchWalker w(branch_);
  for (; w.n() <= N; w.next()) {
    const double n = static_cast<double>(w.n());
    sum.add(w.log_value() / (n * n));
  }
  return sum.value();
}

DivergenceIndex Lemma13Sequence::divergence_index(double B, std::int64_t direct) const {
  DivergenceIndex out;
  out.B = B;
  NeumaierSum sum;
  BranchWalker w(branch_);
  for (;;) {
    const double n = static_cast<double>(w.n());
    const double term = w.log_value() / (n * n);
    if (w.n() >= 5 && term < 0.0) out.monotone = false;
    sum.add(term);
    if (sum.value() > B) {
      out.exact = true;
      out.N = w.n();
      out.log_N = std::log(n);
      out.partial_sum = sum.value();
      return out;
    }
    if (w.n() >= direct) break;
    try {
      w.next();
    } catch (const LabError& e) {
      // selection index out of double range: continue with the bound from here
      if (e.code() != ErrorCode::unsupported) throw;
      direct = w.n() - 1;  // next() had already advanced
      break;
    }
  }
  // For n > direct: lambda_{k_n} >= 2^n / n^2, so
  // S(N) >= S(direct) + log 2 (log(N+1) - log(direct+1)) - 2 sum_{n > direct} log n / n^2.
  const double s0 = sum.value();
  const double nd = static_cast<double>(direct);
  const double logs = 2.0 * log_over_square_tail(nd + 1.0);
  out.log_N = std::log(nd + 1.0) + (B - s0 + logs) / kLn2;
  out.log_N += 1e-9 * std::max(1.0, out.log_N);
  out.partial_sum = s0 + kLn2 * (out.log_N - std::log(nd + 1.0)) - logs;
  if (out.log_N < 43.0) out.N = static_cast<std::int64_t>(std::ceil(std::exp(out.log_N)));
  return out;
}

// ---- finite-entropy truncation ----

TruncationResult thm12_truncation(const SpectralDensity& d, double eps, const SeriesSettings& s) {
  if (!(eps > 0.0)) throw LabError(ErrorCode::invalid_argument, "eps must be positive");
  require_valid(d, s);
  TruncationResult out;
  double m = 1.0;
  double below = trace_below(d, m, s);
  for (int i = 0; below >= eps; ++i) {
    if (i > 2000) throw LabError(ErrorCode::unsupported, "lower cut not found");
    m *= 0.5;
    below = trace_below(d, m, s);
  }
  double M = 2.0;
  double above = trace_above(d, M, s);
  for (int i = 0; above >= eps; ++i) {
    if (i > 2000) throw LabError(ErrorCode::unsupported, "upper cut not found");
    M *= 2.0;
    above = trace_above(d, M, s);
  }
  out.m = m;
  out.M = M;
  out.trace_below = below;
  out.trace_above = above;
  out.distance = below + above;
  out.h_prime = truncate(d, m, M, s);
  return out;
}

// ---- finite trace, infinite entropy ----

SpectralDensity thm14_counterexample(const ResolutionOfIdentity& r, bool normalize_trace,
                                     const SeriesSettings& s) {
  const Lemma13Sequence seq(r, s);
  const double beta = std::exp(r.log_weight.log_coef);
  const double gamma = std::exp(r.log_weight.rate);
  const Plg& e = r.log_weight;
  SpectralDensity d;
  d.total_algebra_trace = seq.total();
  if (r.n0 == 1 && e.power == 0.0 && e.log_power == 0.0 && gamma <= 0.5 &&
      beta * gamma <= 0.5) {
    // alpha_n = beta gamma^n <= 2^-n for every n, so k_n = n
    d.tail = geometric_over_square(beta, gamma);
  } else {
    d.tail = custom_tail({seq.branch()});
    const double off = seq.total() - seq.selected_weight();
    if (off > 1e-12 * seq.total()) d.atoms.push_back({1.0, off});
  }
  if (normalize_trace) d = scale(d, 1.0 / trace(d, s));
  require_valid(d, s);
  return d;
}

// ---- prescribed-entropy approximants ----

Thm15Result thm15_approximant(const SpectralDensity& d, double eps, const Thm15Case& c,
                              const ResolutionOfIdentity& proj, const SeriesSettings& s) {
  if (proj.length > 0)
    throw LabError(ErrorCode::precondition, "the projections e_n must form an infinite sequence");
  Thm15Result out;
  out.truncation = thm12_truncation(d, eps, s);
  const double m = out.truncation.m;
  const double M = out.truncation.M;
  const double available = available_low_trace(d, m, s);
  const Plg& lw = proj.log_weight;
  TailFamily h1;

  switch (c.kind) {
    case Thm15Case::Kind::case1: {
      if (!lw.is_constant())
        throw LabError(ErrorCode::precondition, "case 1 needs projection traces bounded away from 0 and inf");
      const double w = std::exp(lw.log_coef);
      if (!(c.c1 > 0.0 && c.c1 <= w && w <= c.c2))
        throw LabError(ErrorCode::precondition, "projection traces outside [c1, c2]");
      if (std::isfinite(available))
        throw LabError(ErrorCode::insufficient_trace, "infinitely many projections of trace >= c1 need tau(e([0,m))) = inf");
      // lambda_n = kappa / (n log^2 n): n0 with lambda_{n0} < m and c2 sum_{n>=n0} lambda_n < eps
      auto lambda = [](double n) { return 1.0 / (n * std::log(n) * std::log(n)); };
      double rest = inverse_log_square(1.0, 2).declared_trace;
      const double rest2 = rest;
      std::int64_t n0 = 0;
      for (std::int64_t n = 2; n <= kCase1Scan; ++n) {
        const double ln = lambda(static_cast<double>(n));
        if (ln < m && c.c2 * rest < eps) {
          n0 = n;
          break;
        }
        rest -= ln;
      }
      double kappa = 1.0;
      if (n0 == 0) {
        n0 = 2;
        kappa = std::min(eps / (2.0 * c.c2 * rest2), m * std::log(2.0) * std::log(2.0));
      }
      out.n0 = n0;
      out.lambda_scale = kappa;
      h1 = inverse_log_square(w, n0, kappa);
      break;
    }
    case Thm15Case::Kind::case2:
    case Thm15Case::Kind::case3: {
      const bool below = c.kind == Thm15Case::Kind::case2;
      if (below && lw.trend() >= 0)
        throw LabError(ErrorCode::precondition, "case 2 needs projection traces tending to 0");
      if (!below && lw.trend() <= 0)
        throw LabError(ErrorCode::precondition, "case 3 needs unbounded projection traces");
      if (!below && std::isfinite(available))
        throw LabError(ErrorCode::insufficient_trace, "projections with traces >= 2^n need tau(e([0,m))) = inf");
      auto build = [&](double scale, bool use_eps) {
        const double ls = std::log(scale);
        // case 2: s 2^n/n^2 > M (increasing from n = 3); case 3: s/(n^2 2^n) < m
        auto in_range = [&](std::int64_t k) {
          const double n = static_cast<double>(k);
          const double lv = ls + (below ? 1.0 : -1.0) * n * kLn2 - 2.0 * std::log(n);
          return below ? lv > std::log(M) : lv < std::log(m);
        };
        auto small = [&](std::int64_t k) {
          return !use_eps || scale * inverse_square_tail(static_cast<double>(k)) < eps;
        };
        const std::int64_t n0 = first_index(below ? 4 : 1, [&](std::int64_t k) { return in_range(k) && small(k); });
        TailBranch b{SelectionRule{lw, below, scale, static_cast<double>(proj.n0)}, n0};
        BranchWalker probe(b);  // throws when the selection is out of reach
        out.n0 = n0;
        out.lambda_scale = scale;
        return custom_tail({b});
      };
      try {
        h1 = build(1.0, true);
      } catch (const LabError& e) {
        if (e.code() != ErrorCode::unsupported) throw;
        // the minimal n0 needs selection indices past 2^53; shrink the points instead
        const double scale = eps / (2.0 * inverse_square_tail(below ? 4.0 : 1.0));
        h1 = build(scale, false);
      }
      if (below) {
        const double used = tail_sum(h1, Functional::mass(), s).value;
        if (used > available)
          throw LabError(ErrorCode::insufficient_trace, "tau(e([0,m))) cannot carry the selected projections");
      }
      break;
    }
  }

  const SpectralDensity& h2 = out.truncation.h_prime;
  out.h1_prime = make_density({}, h1, d.total_algebra_trace);
  out.h_prime = make_density(h2.atoms, join_tails(h2.tail, h1), d.total_algebra_trace);
  require_valid(out.h_prime, s);
  out.h1_trace = trace(out.h1_prime, s);
  out.distance_bound = out.truncation.trace_below + out.truncation.trace_above + out.h1_trace;
  out.entropy_h1 = entropy(out.h1_prime, s).value;
  out.entropy_h2 = entropy(h2, s).value.value();
  out.entropy = entropy(out.h_prime, s).value;
  return out;
}

}  // namespace segal
