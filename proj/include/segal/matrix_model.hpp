#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "segal/jacobi.hpp"
#include "segal/spectral.hpp"

namespace segal {

using Complex = std::complex<double>;

struct MatrixBlock {
  int dim = 1;
  double weight = 1.0;  // mu_i
};

/// Direct sum of full matrix blocks with tau(x) = sum_i mu_i tr(x_i).
struct WeightedMatrixAlgebra {
  std::vector<MatrixBlock> blocks;

  void check() const;
  double trace_identity() const;  // tau(1)
};

/// One complex matrix per block.
using Element = std::vector<Eigen::MatrixXcd>;

Element identity(const WeightedMatrixAlgebra& A);
Element zero(const WeightedMatrixAlgebra& A);
Element operator+(const Element& x, const Element& y);
Element operator-(const Element& x, const Element& y);
Element operator*(const Element& x, const Element& y);
Element operator*(Complex a, const Element& x);
Element adjoint(const Element& x);

void check_shape(const Element& x, const WeightedMatrixAlgebra& A);
Complex tau(const Element& x, const WeightedMatrixAlgebra& A);
/// max |x_ij| over all blocks.
double max_abs(const Element& x);
/// Operator norm max_i ||x_i||.
double operator_norm(const Element& x);
bool is_hermitian(const Element& x, double tol = 1e-12);

/// Eigenvalues of each block (ascending) with PSD clamping: values in
/// [-1e-10, 0) become 0, anything more negative throws not_psd.
std::vector<Eigen::VectorXd> psd_eigenvalues(const Element& h);
/// g(h) blockwise through the eigendecomposition.
Element apply_function(const Element& h, const std::function<double(double)>& g);
double min_eigenvalue(const Element& h);

SpectralDensity eig_spectral(const Element& a, const WeightedMatrixAlgebra& A);
double entropy_matrix(const Element& a, const WeightedMatrixAlgebra& A);

struct ContractionElement {
  Element z;
  double norm = 0.0;
  bool normal = false;  // z z* = z* z to 1e-10
};
ContractionElement make_contraction(Element z, const WeightedMatrixAlgebra& A);

/// Phi(x) = z* x z + (1 - z z*)^{1/2} x (1 - z z*)^{1/2}.
Element phi_map(const Element& h, const ContractionElement& z, const WeightedMatrixAlgebra& A);

/// max entry of y h - 1/4 sum_k i^k (y + i^k) h (y + i^k)*.
double polarization_identity_check(const Element& y, const Element& h, const WeightedMatrixAlgebra& A);

/// lambda_min(log h2 - log h1) for 1 <= h1 <= h2.
double log_monotonicity_check(const Element& h1, const Element& h2, const WeightedMatrixAlgebra& A);
/// log t against int_0^inf (1/(s+1) - 1/(s+t)) ds by quadrature.
double log_integral_representation(double t);
/// max entry of log(h + eps) - (log eps) 1 - log(h/eps + 1).
double shifted_log_residual(const Element& h, double eps, const WeightedMatrixAlgebra& A);

struct TraceChain {
  double lhs;     // tau((h1+1) log(h1+1))
  double middle;  // tau((h1+1)^{1/2} log(h2+1) (h1+1)^{1/2})
  double rhs;     // tau((h2+1) log(h2+1))
};
TraceChain entropy_trace_monotonicity_check(const Element& h1, const Element& h2,
                                            const WeightedMatrixAlgebra& A);

struct DominationRow {
  std::size_t block;
  std::size_t index;  // 0-based position in descending order
  double theta;
  double bound;
};
/// theta = eigenvalues of z h z*, bound = ||z||^2 lambda(h), both descending per block.
std::vector<DominationRow> eigenvalue_domination_check(const Element& h, const Element& z,
                                                       const WeightedMatrixAlgebra& A);
/// h1 <= h2: eigenvalues of h1 against those of h2, descending per block.
std::vector<DominationRow> weyl_domination_check(const Element& h1, const Element& h2,
                                                 const WeightedMatrixAlgebra& A);

struct PhiEntropy {
  double H_h;
  double H_phi_h;
};
/// Refuses non-normal contractions (non_normal): only then is Phi both unital
/// and trace preserving.
PhiEntropy entropy_monotone_under_phi(const Element& h, const ContractionElement& z,
                                      const WeightedMatrixAlgebra& A);

// ---- random instances ----

Element random_general(const WeightedMatrixAlgebra& A, std::mt19937_64& rng);
/// G G* from a complex Gaussian G, normalized to tau = 1.
Element random_psd(const WeightedMatrixAlgebra& A, std::mt19937_64& rng);
Element random_hermitian(const WeightedMatrixAlgebra& A, std::mt19937_64& rng);
Element random_unitary(const WeightedMatrixAlgebra& A, std::mt19937_64& rng);
/// G / ||G|| scaled by a uniform factor in (0, 1].
Element random_contraction(const WeightedMatrixAlgebra& A, std::mt19937_64& rng);
/// U diag(d) U* with |d_i| <= 1.
Element random_normal_contraction(const WeightedMatrixAlgebra& A, std::mt19937_64& rng);
/// Random algebra with up to `max_blocks` blocks of dim <= max_dim.
WeightedMatrixAlgebra random_algebra(std::mt19937_64& rng, int max_blocks = 3, int max_dim = 4);

}  // namespace segal
