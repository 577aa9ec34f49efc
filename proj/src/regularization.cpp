#include "segal/regularization.hpp"

#include <cmath>

#include "segal/parallel.hpp"

namespace segal {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr int kMaxLogLogM = 5000;

// Lower bound on w t log((Mt+1)/(M+t)) at log M = L:
//   t <  1: (Mt+1)/(M+t) >= t
//   t >= 1: (Mt+1)/(M+t) >= max(1, min(t, M)/2)
double point_lower_bound(double lt, double lw, double L) {
  if (lt == -kInf) return 0.0;
  const double mass = std::exp(lt + lw);
  if (lt < 0.0) return mass * lt;
  return mass * std::max(0.0, std::min(lt, L) - kLn2);
}

// Branches whose trace terms are exactly s/n^2 while log t_n >= A + B ln n + D n.
struct SquareMassForm {
  double log_s, A, B, D;
};

bool square_mass_form(const TailBranch& b, SquareMassForm& out) {
  if (const auto* r = std::get_if<PairRule>(&b.rule)) {
    const Plg mass = r->log_value + r->log_weight;
    const Plg& v = r->log_value;
    if (r->offset != 0.0 || mass.power != -2.0 || mass.log_power != 0.0 || mass.rate != 0.0)
      return false;
    if (v.log_power != 0.0 || !(v.rate > 0.0) || v.power > 0.0) return false;
    out = {mass.log_coef, v.log_coef, v.power, v.rate};
    return true;
  }
  const auto& r = std::get<SelectionRule>(b.rule);
  if (!r.below) return false;
  // alpha_{k_n} <= 2^-n gives t_n >= s 2^n / n^2
  out = {std::log(r.scale), std::log(r.scale), -2.0, kLn2};
  return true;
}

// log of floor((L - A)/D) as a certified lower estimate; -inf when below 1.
double log_last_index(double A, double D, double lambda) {
  if (lambda < 700.0) {
    const double n = std::floor((std::exp(lambda) - A) / D);
    return n >= 1.0 ? std::log(n) : -kInf;
  }
  // L = e^lambda is beyond double range; A and D are negligible against it
  return lambda + std::log1p(-A * std::exp(-lambda)) - std::log(D) - 1e-9;
}

struct WitnessParts {
  bool supported = true;
  // atoms and branch heads below the settled region, and branches bounded
  // below by their negative entropy part, all evaluated per lambda
  std::vector<std::pair<double, double>> points;  // (log t, log w)
  double other_branches = 0.0;
  struct Tail {
    SquareMassForm form;
    std::int64_t a;
  };
  std::vector<Tail> tails;
};

WitnessParts witness_parts(const SpectralDensity& d, const SeriesSettings& s) {
  WitnessParts parts;
  for (const Atom& a : d.atoms) parts.points.emplace_back(std::log(a.value), std::log(a.weight));
  for (const auto& b : d.tail.branches) {
    SquareMassForm form;
    if (square_mass_form(b, form)) {
      const Settle one = settle(b, 1.0, s);
      if (one.side != Side::below) {
        const std::int64_t a = std::max(one.index, b.n0);
        if (a - b.n0 > s.max_head) {
          parts.supported = false;
          return parts;
        }
        BranchWalker w(b);
        for (; w.n() < a; w.next()) parts.points.emplace_back(w.log_value(), w.log_weight());
        parts.tails.push_back({form, a});
        continue;
      }
    }
    const double neg = branch_region_sum(b, Functional::entropy(), 0.0, true, 1.0, false, s).value;
    if (!std::isfinite(neg)) {
      parts.supported = false;
      return parts;
    }
    parts.other_branches += neg;
  }
  if (parts.tails.empty()) parts.supported = false;
  return parts;
}

double evaluate(const WitnessParts& parts, double lambda) {
  const double L = lambda < 700.0 ? std::exp(lambda) : kInf;
  NeumaierSum sum;
  sum.add(parts.other_branches);
  for (const auto& [lt, lw] : parts.points) sum.add(point_lower_bound(lt, lw, L));
  for (const auto& t : parts.tails) {
    const auto& f = t.form;
    const double log_n1 = log_last_index(f.A, f.D, lambda);
    if (!(log_n1 >= std::log(static_cast<double>(t.a)))) continue;
    const double a = static_cast<double>(t.a);
    // sum_{n=a}^{N1} (A - log 2 + B ln n + D n) / n^2, each part bounded below
    const double c0 = f.A - kLn2;
    const double squares = c0 >= 0.0 ? inverse_square_tail(a) - std::exp(-log_n1)
                                     : inverse_square_tail(a);
    const double part = c0 * squares + f.D * (log_n1 + kEulerGamma - harmonic(a - 1.0)) +
                        f.B * log_over_square_tail(a);
    sum.add(std::exp(f.log_s) * part);
  }
  return sum.value();
}

}  // namespace

void RegularizationParams::check() const {
  if (!(m > 0.0 && m < M && std::isfinite(M)))
    throw LabError(ErrorCode::invalid_argument, "regularization needs 0 < m < M < inf");
}

double f_mM_scalar(double t, const RegularizationParams& p) {
  if (t == 0.0) return 0.0;
  return t * regularization_log_ratio(std::log(t), p.m, p.M);
}

double tau_f_mM(const SpectralDensity& d, const RegularizationParams& p, const SeriesSettings& s) {
  p.check();
  NeumaierSum sum;
  for (const Atom& a : d.atoms) sum.add(f_mM_scalar(a.value, p) * a.weight);
  if (!d.tail.empty()) sum.add(tail_sum(d.tail, Functional::regularized(p.m, p.M), s).value);
  return sum.value();
}

double tau_f_mM_quadrature_oracle(const SpectralDensity& d, const RegularizationParams& p) {
  p.check();
  if (!d.tail.empty())
    throw LabError(ErrorCode::precondition, "the quadrature oracle takes atoms only; truncate the tail");
  // t/(s+1) - t/(s+t) = t(t-1)/((s+1)(s+t)), integrated in u = log s
  auto integrand = [&d](double u) {
    const double e = std::exp(u);
    NeumaierSum sum;
    for (const Atom& a : d.atoms) {
      const double t = a.value;
      sum.add(a.weight * t * (t - 1.0) / ((e + 1.0) * (e + t)));
    }
    return sum.value() * e;
  };
  const QuadratureResult q = integrate(integrand, std::log(p.m), std::log(p.M), p.quadrature);
  if (!q.converged)
    throw LabError(ErrorCode::quadrature_failure, "oracle quadrature did not reach abs_tol");
  return q.value;
}

double lipschitz_modulus(const RegularizationParams& p) {
  p.check();
  return std::log1p(p.M) - std::log1p(p.m) + std::log(p.M / p.m);
}

const char* to_string(SweepVerdict v) {
  switch (v) {
    case SweepVerdict::converging:
      return "converging";
    case SweepVerdict::diverging_up:
      return "diverging_up";
    case SweepVerdict::diverging_down:
      return "diverging_down";
    case SweepVerdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

double regularized_lower_bound(const SpectralDensity& d, double lambda, const SeriesSettings& s) {
  const WitnessParts parts = witness_parts(d, s);
  return parts.supported ? evaluate(parts, lambda) : kNaN;
}

DivergenceWitness divergence_witness(const SpectralDensity& d, double threshold, const SeriesSettings& s) {
  DivergenceWitness w;
  const WitnessParts parts = witness_parts(d, s);
  if (!parts.supported) return w;
  for (int lambda = 1; lambda <= kMaxLogLogM; ++lambda) {
    const double lb = evaluate(parts, lambda);
    if (lb > threshold) {
      w.available = true;
      w.log_log_M = lambda;
      w.lower_bound = lb;
      return w;
    }
  }
  return w;
}

SweepResult lemma1_sweep(const SpectralDensity& d, const std::vector<double>& Ms, const SweepSettings& w,
                         const SeriesSettings& s) {
  for (std::size_t i = 0; i < Ms.size(); ++i) {
    if (!(Ms[i] > 1.0 && std::isfinite(Ms[i])))
      throw LabError(ErrorCode::invalid_argument, "sweep M values must exceed 1");
    if (i > 0 && !(Ms[i] > Ms[i - 1]))
      throw LabError(ErrorCode::invalid_argument, "sweep M values must ascend");
  }
  SweepResult out;
  out.entropy = entropy(d, s).value;
  out.rows.resize(Ms.size());
  const bool finite = out.entropy.is_finite();
  const double H = out.entropy.value();
  parallel_for(Ms.size(), [&](std::size_t i) {
    const double M = Ms[i];
    const double tf = tau_f_mM(d, RegularizationParams(1.0 / M, M), s);
    out.rows[i] = {M, tf, finite ? std::abs(tf - H) : kNaN};
  });
  if (out.rows.empty()) return out;
  const SweepRow& first = out.rows.front();
  const SweepRow& last = out.rows.back();
  switch (out.entropy.verdict()) {
    case Verdict::finite:
      if (last.gap < w.converge_threshold && (last.gap < first.gap || last.gap == 0.0))
        out.verdict = SweepVerdict::converging;
      break;
    case Verdict::plus_infinity:
      if (last.tau_f > w.diverge_threshold) {
        out.verdict = SweepVerdict::diverging_up;
      } else if (w.extend) {
        out.witness = divergence_witness(d, w.diverge_threshold, s);
        if (out.witness.available) out.verdict = SweepVerdict::diverging_up;
      }
      break;
    case Verdict::minus_infinity:
      if (last.tau_f < -w.diverge_threshold) out.verdict = SweepVerdict::diverging_down;
      break;
    case Verdict::undefined:
      break;
  }
  return out;
}

}  // namespace segal
