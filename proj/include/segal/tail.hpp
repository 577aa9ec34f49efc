#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "segal/extended_value.hpp"
#include "segal/numeric.hpp"

namespace segal {

/// Exponent A + B ln n + C ln ln n + D n of a power-log-geometric sequence
/// coef * n^B * (ln n)^C * base^n.
struct Plg {
  double log_coef = 0.0;
  double power = 0.0;
  double log_power = 0.0;
  double rate = 0.0;

  static Plg from_factors(double coef, double power, double log_power, double base);

  double operator()(double n) const;
  double derivative(double n) const;
  /// Sign of the dominant non-constant term; 0 for a constant.
  int trend() const;
  /// Index from which the sequence is strictly monotone in the direction of trend().
  double monotone_from() const;
  bool is_constant() const { return rate == 0.0 && power == 0.0 && log_power == 0.0; }

  Plg operator+(const Plg& o) const {
    return {log_coef + o.log_coef, power + o.power, log_power + o.log_power, rate + o.rate};
  }
  Plg operator*(double a) const { return {log_coef * a, power * a, log_power * a, rate * a}; }
};

/// Comparison-test verdict for sum_n exp(e(n)).
bool plg_series_converges(const Plg& e);

/// n -> (t_n, w_n) with log t_n = log_value(n), log w_n = log_weight(n); the
/// spectral value is t_n + offset.
struct PairRule {
  Plg log_value;
  Plg log_weight;
  double offset = 0.0;
};

/// Selection from a resolution alpha_k = exp(log_resolution(k)): k_n is the
/// first index above k_{n-1} with alpha_k <= 2^-n (below) or >= 2^n (above);
/// the point is (scale / (n^2 alpha_{k_n}), alpha_{k_n}).
struct SelectionRule {
  Plg log_resolution;
  bool below = true;
  double scale = 1.0;
  double k0 = 1.0;
};

struct TailBranch {
  std::variant<PairRule, SelectionRule> rule;
  std::int64_t n0 = 1;
};

enum class TailKind { none, geometric_over_square, inverse_log_square, custom_pair_sequence };

const char* to_string(TailKind k);
bool parse_tail_kind(const std::string& text, TailKind& out);

using ParamList = std::vector<std::pair<std::string, std::string>>;

struct TailFamily {
  TailKind kind = TailKind::none;
  ParamList params;
  std::vector<TailBranch> branches;
  double declared_trace = kNaN;
  Verdict declared_class = Verdict::finite;

  bool empty() const { return kind == TailKind::none; }
};

/// Builds the branches of a named family from its parameter list; throws
/// LabError(invalid_argument) on unknown or out-of-range parameters.
TailFamily make_tail(TailKind kind, const ParamList& params);
TailFamily geometric_over_square(double beta, double gamma, double scale = 1.0, std::int64_t n0 = 1);
TailFamily inverse_log_square(double w, std::int64_t n0 = 2, double scale = 1.0);
/// A custom_pair_sequence tail whose parameter list is generated from the branches.
TailFamily custom_tail(std::vector<TailBranch> branches);

struct SeriesSettings {
  std::int64_t cutoff = 1'000'000;  // direct terms before the remainder estimate must have settled
  std::int64_t max_head = 50'000'000;
};

/// The per-point integrand w * phi(t).
struct Functional {
  enum class Kind { mass, trace, moment, entropy, regularized };
  Kind kind = Kind::trace;
  double p = 1.0;
  double m = 0.0;
  double M = 0.0;

  static Functional mass() { return {Kind::mass}; }
  static Functional trace() { return {Kind::trace}; }
  static Functional moment(double p) { return {Kind::moment, p}; }
  static Functional entropy() { return {Kind::entropy}; }
  static Functional regularized(double m, double M) { return {Kind::regularized, 1.0, m, M}; }

  /// w * phi(v) from log v and log w.
  double eval(double log_v, double log_w) const;
};

/// log((M+1)(m+t) / ((m+1)(M+t))) from log t, stable for huge t and M.
double regularization_log_ratio(double log_t, double m, double M);

struct SeriesValue {
  double value = 0.0;
  std::int64_t terms = 0;  // terms summed directly
  bool settled = true;     // remainder estimate converged before the cutoff
};

/// Sequential access to the points of a branch.
class BranchWalker {
 public:
  explicit BranchWalker(const TailBranch& branch);
  std::int64_t n() const { return n_; }
  double log_value() const { return log_value_; }
  double log_weight() const { return log_weight_; }
  double selected_index() const { return k_; }
  void next();
  void advance_to(std::int64_t n);

 private:
  void load();
  const TailBranch& branch_;
  std::int64_t n_;
  double k_ = 0.0;
  double log_value_ = 0.0;
  double log_weight_ = 0.0;
};

enum class Side { below, equal, above };

struct Settle {
  std::int64_t index;  // from here on every point lies on `side` of the threshold
  Side side;
};

Settle settle(const TailBranch& b, double x, const SeriesSettings& s = {});

/// sum_{n >= from} w_n phi(t_n); +-inf for divergent series.
SeriesValue branch_sum(const TailBranch& b, const Functional& f, std::int64_t from,
                       const SeriesSettings& s = {});
/// Same, restricted to points with value in the given range.
SeriesValue branch_region_sum(const TailBranch& b, const Functional& f, double lo, bool lo_closed,
                              double hi, bool hi_closed, const SeriesSettings& s = {});
ExtendedEntropyValue branch_entropy(const TailBranch& b, const SeriesSettings& s = {},
                                    std::int64_t* terms = nullptr);

SeriesValue tail_sum(const TailFamily& t, const Functional& f, const SeriesSettings& s = {});
SeriesValue tail_region_sum(const TailFamily& t, const Functional& f, double lo, bool lo_closed,
                            double hi, bool hi_closed, const SeriesSettings& s = {});
ExtendedEntropyValue tail_entropy(const TailFamily& t, const SeriesSettings& s = {},
                                  std::int64_t* terms = nullptr);

/// Fills declared_trace / declared_class from the analytic verdicts.
void derive_declarations(TailFamily& t, const SeriesSettings& s = {});

/// Multiplies every tail value by a (offsets included).
TailFamily scale_tail(const TailFamily& t, double a);
/// Adds c to every tail value.
TailFamily offset_tail(const TailFamily& t, double c);

}  // namespace segal
