#include "segal/matrix_model.hpp"

#include <algorithm>
#include <cmath>

namespace segal {

namespace {

constexpr double kPsdSlack = 1e-10;

Eigen::MatrixXcd block_function(const Eigen::MatrixXcd& h, const std::function<double(double)>& g) {
  const auto e = jacobi_eigen(h);
  Eigen::VectorXcd f(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) f(i) = g(e.values(i));
  return e.vectors * f.asDiagonal() * e.vectors.adjoint();
}

Eigen::VectorXd clamp_psd(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) < -kPsdSlack) throw LabError(ErrorCode::not_psd, "element is not positive semidefinite");
    if (v(i) < 0.0) v(i) = 0.0;
  }
  return v;
}

Eigen::VectorXd descending(const Eigen::VectorXd& ascending) { return ascending.reverse(); }

void require_order(const Element& h1, const Element& h2, const char* what) {
  if (min_eigenvalue(h2 - h1) < -kPsdSlack) throw LabError(ErrorCode::precondition, what);
}

Eigen::MatrixXcd gaussian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd g(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = Complex(n(rng), n(rng));
  return g;
}

Eigen::MatrixXcd haar_unitary(int dim, std::mt19937_64& rng) {
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gaussian(dim, rng));
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR();
  for (int i = 0; i < dim; ++i) {
    const double mag = std::abs(r(i, i));
    if (mag > 0.0) q.col(i) *= r(i, i) / mag;
  }
  return q;
}

}  // namespace

void WeightedMatrixAlgebra::check() const {
  if (blocks.empty()) throw LabError(ErrorCode::invalid_argument, "algebra needs at least one block");
  for (const auto& b : blocks)
    if (b.dim < 1 || !(b.weight > 0.0) || !std::isfinite(b.weight))
      throw LabError(ErrorCode::invalid_argument, "blocks need dim >= 1 and weight > 0");
}

double WeightedMatrixAlgebra::trace_identity() const {
  double t = 0.0;
  for (const auto& b : blocks) t += b.weight * b.dim;
  return t;
}

Element identity(const WeightedMatrixAlgebra& A) {
  Element x;
  for (const auto& b : A.blocks) x.push_back(Eigen::MatrixXcd::Identity(b.dim, b.dim));
  return x;
}

Element zero(const WeightedMatrixAlgebra& A) {
  Element x;
  for (const auto& b : A.blocks) x.push_back(Eigen::MatrixXcd::Zero(b.dim, b.dim));
  return x;
}

namespace {
template <class Op>
Element zip(const Element& x, const Element& y, Op op) {
  if (x.size() != y.size()) throw LabError(ErrorCode::invalid_argument, "block count mismatch");
  Element out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].rows() != y[i].rows()) throw LabError(ErrorCode::invalid_argument, "block size mismatch");
    out.push_back(op(x[i], y[i]));
  }
  return out;
}
}  // namespace

Element operator+(const Element& x, const Element& y) {
  return zip(x, y, [](const auto& a, const auto& b) -> Eigen::MatrixXcd { return a + b; });
}
Element operator-(const Element& x, const Element& y) {
  return zip(x, y, [](const auto& a, const auto& b) -> Eigen::MatrixXcd { return a - b; });
}
Element operator*(const Element& x, const Element& y) {
  return zip(x, y, [](const auto& a, const auto& b) -> Eigen::MatrixXcd { return a * b; });
}
Element operator*(Complex a, const Element& x) {
  Element out;
  for (const auto& b : x) out.push_back(a * b);
  return out;
}
Element adjoint(const Element& x) {
  Element out;
  for (const auto& b : x) out.push_back(b.adjoint());
  return out;
}

void check_shape(const Element& x, const WeightedMatrixAlgebra& A) {
  if (x.size() != A.blocks.size()) throw LabError(ErrorCode::invalid_argument, "block count mismatch");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i].rows() != A.blocks[i].dim || x[i].cols() != A.blocks[i].dim)
      throw LabError(ErrorCode::invalid_argument, "block size mismatch");
}

Complex tau(const Element& x, const WeightedMatrixAlgebra& A) {
  check_shape(x, A);
  Complex t = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) t += A.blocks[i].weight * x[i].trace();
  return t;
}

double max_abs(const Element& x) {
  double m = 0.0;
  for (const auto& b : x)
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

double operator_norm(const Element& x) {
  double m = 0.0;
  for (const auto& b : x) {
    const Eigen::MatrixXcd g = b.adjoint() * b;
    m = std::max(m, std::sqrt(std::max(0.0, jacobi_eigen(g).values.maxCoeff())));
  }
  return m;
}

bool is_hermitian(const Element& x, double tol) {
  for (const auto& b : x)
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > tol * (1.0 + b.cwiseAbs().maxCoeff())) return false;
  return true;
}

std::vector<Eigen::VectorXd> psd_eigenvalues(const Element& h) {
  if (!is_hermitian(h)) throw LabError(ErrorCode::invalid_argument, "element is not Hermitian");
  std::vector<Eigen::VectorXd> out;
  for (const auto& b : h) out.push_back(clamp_psd(jacobi_eigen(b).values));
  return out;
}

Element apply_function(const Element& h, const std::function<double(double)>& g) {
  if (!is_hermitian(h)) throw LabError(ErrorCode::invalid_argument, "element is not Hermitian");
  Element out;
  for (const auto& b : h) out.push_back(block_function(b, g));
  return out;
}

double min_eigenvalue(const Element& h) {
  double m = kInf;
  for (const auto& b : h) m = std::min(m, jacobi_eigen(b).values.minCoeff());
  return m;
}

SpectralDensity eig_spectral(const Element& a, const WeightedMatrixAlgebra& A) {
  check_shape(a, A);
  const auto values = psd_eigenvalues(a);
  std::vector<Atom> raw;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (Eigen::Index j = 0; j < values[i].size(); ++j) raw.push_back({values[i](j), A.blocks[i].weight});
  std::sort(raw.begin(), raw.end(), [](const Atom& x, const Atom& y) { return x.value < y.value; });
  // clusters within 1e-9 of their first value; the weighted mean keeps the trace
  std::vector<Atom> atoms;
  double start = 0.0;
  NeumaierSum mass, weight;
  auto flush = [&] {
    if (weight.value() > 0.0) atoms.push_back({mass.value() / weight.value(), weight.value()});
    mass = {};
    weight = {};
  };
  for (const Atom& x : raw) {
    if (weight.value() > 0.0 && x.value - start > 1e-9) flush();
    if (weight.value() == 0.0) start = x.value;
    mass.add(x.value * x.weight);
    weight.add(x.weight);
  }
  flush();
  return make_density(std::move(atoms), {}, A.trace_identity());
}

double entropy_matrix(const Element& a, const WeightedMatrixAlgebra& A) {
  check_shape(a, A);
  const auto values = psd_eigenvalues(a);
  NeumaierSum sum;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (Eigen::Index j = 0; j < values[i].size(); ++j) sum.add(A.blocks[i].weight * xlogx(values[i](j)));
  return sum.value();
}

ContractionElement make_contraction(Element z, const WeightedMatrixAlgebra& A) {
  check_shape(z, A);
  ContractionElement c;
  c.norm = operator_norm(z);
  if (c.norm > 1.0 + 1e-10) throw LabError(ErrorCode::norm_violation, "contraction has norm above 1");
  const Element zs = adjoint(z);
  c.normal = max_abs(z * zs - zs * z) <= 1e-10;
  c.z = std::move(z);
  return c;
}

Element phi_map(const Element& h, const ContractionElement& c, const WeightedMatrixAlgebra& A) {
  check_shape(h, A);
  check_shape(c.z, A);
  if (operator_norm(c.z) > 1.0 + 1e-10)
    throw LabError(ErrorCode::norm_violation, "contraction has norm above 1");
  psd_eigenvalues(h);
  const Element zs = adjoint(c.z);
  const Element root = apply_function(identity(A) - c.z * zs, [](double t) { return std::sqrt(std::max(t, 0.0)); });
  return zs * h * c.z + root * h * root;
}

double polarization_identity_check(const Element& y, const Element& h, const WeightedMatrixAlgebra& A) {
  check_shape(y, A);
  check_shape(h, A);
  const Element one = identity(A);
  const Complex powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  Element sum = zero(A);
  for (const Complex ik : powers) {
    const Element shifted = y + ik * one;
    sum = sum + ik * (shifted * h * adjoint(shifted));
  }
  return max_abs(y * h - Complex(0.25) * sum);
}

double log_monotonicity_check(const Element& h1, const Element& h2, const WeightedMatrixAlgebra& A) {
  check_shape(h1, A);
  check_shape(h2, A);
  if (min_eigenvalue(h1) < 1.0 - kPsdSlack) throw LabError(ErrorCode::precondition, "needs h1 >= 1");
  require_order(h1, h2, "needs h1 <= h2");
  auto log = [](double t) { return std::log(t); };
  return min_eigenvalue(apply_function(h2, log) - apply_function(h1, log));
}

double log_integral_representation(double t) {
  if (!(t > 0.0)) throw LabError(ErrorCode::invalid_argument, "log representation needs t > 0");
  QuadratureSettings q;
  q.abs_tol = 1e-13;
  const auto r = integrate_to_infinity([t](double s) { return (t - 1.0) / ((s + 1.0) * (s + t)); }, 0.0, q);
  if (!r.converged) throw LabError(ErrorCode::quadrature_failure, "log representation did not converge");
  return r.value;
}

double shifted_log_residual(const Element& h, double eps, const WeightedMatrixAlgebra& A) {
  check_shape(h, A);
  if (!(eps > 0.0)) throw LabError(ErrorCode::invalid_argument, "shift must be positive");
  psd_eigenvalues(h);
  const Element one = identity(A);
  const Element lhs = apply_function(h + Complex(eps) * one, [](double t) { return std::log(t); });
  const Element rhs = Complex(std::log(eps)) * one +
                      apply_function(Complex(1.0 / eps) * h + one, [](double t) { return std::log(t); });
  return max_abs(lhs - rhs);
}

TraceChain entropy_trace_monotonicity_check(const Element& h1, const Element& h2,
                                            const WeightedMatrixAlgebra& A) {
  check_shape(h1, A);
  check_shape(h2, A);
  psd_eigenvalues(h1);
  psd_eigenvalues(h2);
  require_order(h1, h2, "needs h1 <= h2");
  auto ent = [](double t) {
    const double u = std::max(t, 0.0) + 1.0;
    return u * std::log(u);
  };
  const Element root = apply_function(h1, [](double t) { return std::sqrt(std::max(t, 0.0) + 1.0); });
  const Element log2 = apply_function(h2, [](double t) { return std::log(std::max(t, 0.0) + 1.0); });
  TraceChain c;
  c.lhs = tau(apply_function(h1, ent), A).real();
  c.middle = tau(root * log2 * root, A).real();
  c.rhs = tau(apply_function(h2, ent), A).real();
  return c;
}

std::vector<DominationRow> eigenvalue_domination_check(const Element& h, const Element& z,
                                                       const WeightedMatrixAlgebra& A) {
  check_shape(h, A);
  check_shape(z, A);
  const auto lambda = psd_eigenvalues(h);
  const auto theta = psd_eigenvalues(z * h * adjoint(z));
  const double n2 = operator_norm(z) * operator_norm(z);
  std::vector<DominationRow> rows;
  for (std::size_t b = 0; b < lambda.size(); ++b) {
    const Eigen::VectorXd l = descending(lambda[b]);
    const Eigen::VectorXd t = descending(theta[b]);
    for (Eigen::Index i = 0; i < l.size(); ++i)
      rows.push_back({b, static_cast<std::size_t>(i), t(i), n2 * l(i)});
  }
  return rows;
}

std::vector<DominationRow> weyl_domination_check(const Element& h1, const Element& h2,
                                                 const WeightedMatrixAlgebra& A) {
  check_shape(h1, A);
  check_shape(h2, A);
  const auto l1 = psd_eigenvalues(h1);
  const auto l2 = psd_eigenvalues(h2);
  require_order(h1, h2, "needs h1 <= h2");
  std::vector<DominationRow> rows;
  for (std::size_t b = 0; b < l1.size(); ++b) {
    const Eigen::VectorXd t = descending(l1[b]);
    const Eigen::VectorXd l = descending(l2[b]);
    for (Eigen::Index i = 0; i < t.size(); ++i) rows.push_back({b, static_cast<std::size_t>(i), t(i), l(i)});
  }
  return rows;
}

PhiEntropy entropy_monotone_under_phi(const Element& h, const ContractionElement& z,
                                      const WeightedMatrixAlgebra& A) {
  if (!z.normal)
    throw LabError(ErrorCode::non_normal,
                   "Phi(1) = z*z + 1 - zz* differs from 1 unless z is normal; no direction is asserted");
  return {entropy_matrix(h, A), entropy_matrix(phi_map(h, z, A), A)};
}

// ---- random instances ----

Element random_general(const WeightedMatrixAlgebra& A, std::mt19937_64& rng) {
  Element x;
  for (const auto& b : A.blocks) x.push_back(gaussian(b.dim, rng));
  return x;
}

Element random_psd(const WeightedMatrixAlgebra& A, std::mt19937_64& rng) {
  Element x;
  for (const auto& b : A.blocks) {
    const Eigen::MatrixXcd g = gaussian(b.dim, rng);
    x.push_back(g * g.adjoint());
  }
  const double t = tau(x, A).real();
  return Complex(1.0 / t) * x;
}

Element random_hermitian(const WeightedMatrixAlgebra& A, std::mt19937_64& rng) {
  Element x;
  for (const auto& b : A.blocks) {
    const Eigen::MatrixXcd g = gaussian(b.dim, rng);
    x.push_back((g + g.adjoint()) / 2.0);
  }
  return x;
}

Element random_unitary(const WeightedMatrixAlgebra& A, std::mt19937_64& rng) {
  Element x;
  for (const auto& b : A.blocks) x.push_back(haar_unitary(b.dim, rng));
  return x;
}

Element random_contraction(const WeightedMatrixAlgebra& A, std::mt19937_64& rng) {
  const Element g = random_general(A, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double factor = 1.0 - u(rng);  // (0, 1]
  return Complex(factor / operator_norm(g)) * g;
}

Element random_normal_contraction(const WeightedMatrixAlgebra& A, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Element x;
  for (const auto& b : A.blocks) {
    const Eigen::MatrixXcd q = haar_unitary(b.dim, rng);
    Eigen::VectorXcd d(b.dim);
    for (int i = 0; i < b.dim; ++i) d(i) = std::polar(u(rng), 2.0 * M_PI * u(rng));
    x.push_back(q * d.asDiagonal() * q.adjoint());
  }
  return x;
}

WeightedMatrixAlgebra random_algebra(std::mt19937_64& rng, int max_blocks, int max_dim) {
  std::uniform_int_distribution<int> blocks(1, max_blocks);
  std::uniform_int_distribution<int> dim(1, max_dim);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  WeightedMatrixAlgebra A;
  const int k = blocks(rng);
  for (int i = 0; i < k; ++i) A.blocks.push_back({dim(rng), weight(rng)});
  return A;
}

}  // namespace segal
