#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "segal/regularization.hpp"

namespace segal {

/// Smallest r >= 0 with log(1+u) <= u^eps for every u >= r; 0 for eps >= 1.
double r_eps(double eps);

/// tau(h^p); +inf when a tail moment diverges.
double moment(const SpectralDensity& d, double p, const SeriesSettings& s = {});

struct BoundCheckRow {
  double m = kNaN;
  double M = kNaN;
  std::int64_t n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

/// a^{1-eps} tau(e([a, inf))) <= tau(h^{1-eps}); slack = rhs - lhs.
BoundCheckRow tail_mass_inequality_check(const SpectralDensity& d, double a, double eps,
                                         const SeriesSettings& s = {});

enum class SemicontinuityMode { upper, lower, lower_finite };
const char* to_string(SemicontinuityMode m);
bool parse_mode(const std::string& text, SemicontinuityMode& out);

/// h_n built from the atoms of h0: t -> t (constant), t + a n^-p (additive),
/// t (1 + a n^-p) (multiplicative). Weights are shared, so every h_n lies on
/// the grid of h0.
struct SequenceRule {
  enum class Kind { constant, additive, multiplicative };
  Kind kind = Kind::constant;
  double a = 0.0;
  double p = 1.0;
};
const char* to_string(SequenceRule::Kind k);
bool parse_sequence_kind(const std::string& text, SequenceRule::Kind& out);

struct ExperimentSpec {
  std::string name;
  SpectralDensity h0;
  SequenceRule sequence;
  double epsilon = 0.5;
  std::optional<double> c;  // unset: max of the moments over h0 and the generated h_n
  SemicontinuityMode mode = SemicontinuityMode::upper;
  std::int64_t n_max = 1000;
  std::vector<double> ms{1e-3, 1e-2, 1e-1};
  std::vector<double> Ms{10.0, 100.0, 1000.0};
};

/// A validated experiment; construction checks the moment constraint for h0 and
/// every generated h_n, and the mode preconditions.
class SemicontinuityExperiment {
 public:
  explicit SemicontinuityExperiment(ExperimentSpec spec);

  const ExperimentSpec& spec() const { return spec_; }
  const SpectralDensity& h0() const { return spec_.h0; }
  double epsilon() const { return spec_.epsilon; }
  double c() const { return c_; }
  double r() const { return r_; }
  SemicontinuityMode mode() const { return spec_.mode; }
  std::int64_t n_max() const { return spec_.n_max; }
  SpectralDensity h(std::int64_t n) const;
  /// Smallest n = 10^k (k <= 12) with ||h_n - h0||_1 < 1e-6, or 0 if none.
  std::int64_t convergence_index() const { return converged_at_; }
  double max_moment() const { return max_moment_; }

 private:
  ExperimentSpec spec_;
  double c_ = 0.0;
  double r_ = 0.0;
  double max_moment_ = 0.0;
  std::int64_t converged_at_ = 0;
};

/// Per-n forms of the three bound chains.
BoundCheckRow usc_bound_check(const SemicontinuityExperiment& x, double m, double M, std::int64_t n);
BoundCheckRow lsc_bound_check(const SemicontinuityExperiment& x, double m, double M, std::int64_t n);
BoundCheckRow lsc_finite_bound_check(const SemicontinuityExperiment& x, double m, double M,
                                     std::int64_t n);
/// Dispatches on the experiment's mode.
BoundCheckRow bound_check(const SemicontinuityExperiment& x, double m, double M, std::int64_t n);

/// Rows over the experiment's (m, M) grid and n = 1..n_max, ordered by (m, M, n).
std::vector<BoundCheckRow> run_experiment(const SemicontinuityExperiment& x);

struct TrendRow {
  double M;
  double observed;  // max (upper) or min (lower) of tau(f(h_n)) over n in [N/2, N]
  double bound;     // the n -> inf bound at h0 with m = 1/M
  double delta;     // distance of the bound from H(h0)
};
struct LimitTrend {
  double H0 = kNaN;
  std::vector<TrendRow> rows;
  bool delta_decreasing = true;
};
LimitTrend limit_trend(const SemicontinuityExperiment& x, const std::vector<double>& Ms = {10.0, 100.0, 1000.0});

/// min over a uniform grid on [0, 1/2] of log(1-u) + 2 log 2 u (>= 0 expected).
double log1m_grid_check(int points = 10001);

}  // namespace segal
