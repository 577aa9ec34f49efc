#pragma once

#include <cstdint>
#include <vector>

#include "segal/entropy.hpp"

namespace segal {

/// Trace weights tau(e_n) = exp(log_weight(n)) for n >= n0; length 0 means the
/// resolution is infinite, otherwise it stops after `length` projections.
struct ResolutionOfIdentity {
  Plg log_weight;
  std::int64_t n0 = 1;
  std::int64_t length = 0;

  static ResolutionOfIdentity geometric(double beta, double gamma);  // beta gamma^n
  double weight(std::int64_t n) const;
  /// sum_n tau(e_n); +inf when the series diverges.
  double total(const SeriesSettings& s = {}) const;
};

struct DivergenceIndex {
  double B = 0.0;
  bool exact = false;         // N summed term by term
  std::int64_t N = 0;         // valid when exact
  double log_N = kNaN;        // log of N (certified upper estimate when not exact)
  double partial_sum = kNaN;  // S(N), or the certified lower bound at N
  bool monotone = true;       // S nondecreasing from n = 5 on the summed range
};

class Lemma13Sequence {
 public:
  explicit Lemma13Sequence(ResolutionOfIdentity r, const SeriesSettings& s = {});

  const ResolutionOfIdentity& resolution() const { return r_; }
  /// The selected points (lambda_{k_n}, alpha_{k_n}) as a tail branch.
  const TailBranch& branch() const { return branch_; }
  std::int64_t k(std::int64_t n) const;
  /// lambda_r: 1/(alpha_{k_n} n^2) when r = k_n, else 1.
  double lambda(std::int64_t r) const;

  double total() const { return total_; }
  double selected_weight() const { return selected_weight_; }
  /// sum_n alpha_n lambda_n = sum 1/n^2 + sum_{r != k_n} alpha_r.
  double weighted_sum() const;
  /// sum_{n <= N} (1/n^2) log(1/(alpha_{k_n} n^2)).
  double divergent_partial_sum(std::int64_t N) const;
  /// Smallest N with divergent_partial_sum(N) > B; beyond `direct` terms the
  /// bound lambda_{k_n} >= 2^n / n^2 gives a certified N.
  DivergenceIndex divergence_index(double B, std::int64_t direct = 1'000'000) const;

 private:
  ResolutionOfIdentity r_;
  TailBranch branch_;
  double total_ = 0.0;
  double selected_weight_ = 0.0;
};

struct TruncationResult {
  SpectralDensity h_prime;
  double m = 0.0;
  double M = 0.0;
  double trace_below = 0.0;  // tau(h e([0, m)))
  double trace_above = 0.0;  // tau(h e((M, inf)))
  double distance = 0.0;     // ||h - h'||_1 = trace_below + trace_above
};

/// Finite-entropy approximant within 2 eps.
TruncationResult thm12_truncation(const SpectralDensity& d, double eps, const SeriesSettings& s = {});

/// Infinite-entropy density with finite trace on a finite algebra with an
/// infinite resolution of identity.
SpectralDensity thm14_counterexample(const ResolutionOfIdentity& r, bool normalize_trace = false,
                                     const SeriesSettings& s = {});

struct Thm15Case {
  enum class Kind { case1, case2, case3 };
  Kind kind = Kind::case1;
  double c1 = 0.0;
  double c2 = 0.0;
};

struct Thm15Result {
  SpectralDensity h_prime;
  SpectralDensity h1_prime;  // the infinite-entropy piece, spectrum outside [m, M]
  TruncationResult truncation;
  std::int64_t n0 = 0;
  double lambda_scale = 1.0;  // kappa (case 1) or the selection scale (cases 2, 3)
  double h1_trace = 0.0;
  double distance_bound = 0.0;  // trace_below + trace_above + tau(h'_1)
  ExtendedEntropyValue entropy_h1;
  double entropy_h2 = 0.0;  // int_m^M t log t
  ExtendedEntropyValue entropy;
};

Thm15Result thm15_approximant(const SpectralDensity& d, double eps, const Thm15Case& c,
                              const ResolutionOfIdentity& proj_weights, const SeriesSettings& s = {});

}  // namespace segal
