#pragma once

#include <vector>

#include "segal/entropy.hpp"
#include "segal/error.hpp"

namespace segal {

struct RegularizationParams {
  double m = 0.0;
  double M = 0.0;
  QuadratureSettings quadrature;  // abs_tol 1e-10, at most 2^16 panels

  RegularizationParams(double m_, double M_) : m(m_), M(M_) { check(); }
  void check() const;
};

/// t log[(M+1)(m+t) / ((m+1)(M+t))], 0 at t = 0.
double f_mM_scalar(double t, const RegularizationParams& p);

/// tau(f_{m,M}(h)); always finite for h in L1.
double tau_f_mM(const SpectralDensity& d, const RegularizationParams& p, const SeriesSettings& s = {});

/// int_m^M sum_i w_i (t_i/(s+1) - t_i/(s+t_i)) ds by adaptive quadrature;
/// atoms only.
double tau_f_mM_quadrature_oracle(const SpectralDensity& d, const RegularizationParams& p);

/// log((M+1)/(m+1)) + log(M/m) = int_m^M (1/(s+1) + 1/s) ds.
double lipschitz_modulus(const RegularizationParams& p);

enum class SweepVerdict { converging, diverging_up, diverging_down, inconclusive };
const char* to_string(SweepVerdict v);

struct SweepRow {
  double M;
  double tau_f;
  double gap;  // |tau_f - H|, NaN when H is not finite
};

/// Certified lower bound on tau(f_{1/M,M}(h)) at M = exp(exp(log_log_M)),
/// for grids too large to represent in floating point.
struct DivergenceWitness {
  bool available = false;
  double log_log_M = kNaN;
  double lower_bound = kNaN;
};

struct SweepSettings {
  double converge_threshold = 1e-2;
  double diverge_threshold = 1e3;
  bool extend = true;  // search a divergence witness past the grid
};

struct SweepResult {
  std::vector<SweepRow> rows;
  ExtendedEntropyValue entropy;
  SweepVerdict verdict = SweepVerdict::inconclusive;
  DivergenceWitness witness;
};

SweepResult lemma1_sweep(const SpectralDensity& d, const std::vector<double>& Ms,
                         const SweepSettings& w = {}, const SeriesSettings& s = {});

/// Lower bound on tau(f_{1/M,M}(d)) at log log M = lambda; NaN when the tail has
/// no supported lower-bound form.
double regularized_lower_bound(const SpectralDensity& d, double lambda, const SeriesSettings& s = {});

/// Smallest integer log log M at which the lower bound exceeds the threshold.
DivergenceWitness divergence_witness(const SpectralDensity& d, double threshold,
                                     const SeriesSettings& s = {});

}  // namespace segal
