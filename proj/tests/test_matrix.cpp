#include <doctest.h>

#include "oracles.hpp"
#include "segal/entropy.hpp"
#include "segal/matrix_model.hpp"

using namespace segal;
using doctest::Approx;

namespace {

WeightedMatrixAlgebra single(int dim, double weight = 1.0) { return {{{dim, weight}}}; }

Element mat2(Complex a, Complex b, Complex c, Complex d) {
  Eigen::MatrixXcd m(2, 2);
  m << a, b, c, d;
  return {m};
}

const Element kAnchor = mat2(1.5, 0.5, 0.5, 1.5);

}  // namespace

TEST_CASE("jacobi matches the closed-form 2x2 eigenvalues") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 200; ++i) {
    const double a = n(rng), d = n(rng);
    const Complex b(n(rng), n(rng));
    Eigen::Matrix2cd m;
    m << a, b, std::conj(b), d;
    const auto e = jacobi_eigen(m);
    const auto [lo, hi] = oracle::eig2(a, b, d);
    CHECK(e.values(0) == Approx(lo).epsilon(1e-13).scale(1));
    CHECK(e.values(1) == Approx(hi).epsilon(1e-13).scale(1));
  }
}

TEST_CASE("eig_spectral") {
  const auto a = eig_spectral(mat2(2, 0, 0, 0.5), single(2));
  REQUIRE(a.atoms.size() == 2);
  CHECK(a.atoms[0].value == Approx(0.5));
  CHECK(a.atoms[1].value == Approx(2));
  CHECK(a.atoms[1].weight == 1.0);

  const auto b = eig_spectral(kAnchor, single(2));
  REQUIRE(b.atoms.size() == 2);
  CHECK(b.atoms[0].value == Approx(1));
  CHECK(b.atoms[1].value == Approx(2));

  WeightedMatrixAlgebra two{{{1, 2.0}, {1, 3.0}}};
  Element ones{Eigen::MatrixXcd::Ones(1, 1), Eigen::MatrixXcd::Ones(1, 1)};
  const auto c = eig_spectral(ones, two);
  REQUIRE(c.atoms.size() == 1);
  CHECK(c.atoms[0].value == 1.0);
  CHECK(c.atoms[0].weight == Approx(5));
  CHECK(c.total_algebra_trace == Approx(5));
  CHECK(trace(c) == Approx(tau(ones, two).real()));
}

TEST_CASE("entropy_matrix") {
  CHECK(entropy_matrix(mat2(2, 0, 0, 0.5), single(2)) == Approx(1.5 * std::log(2.0)));
  CHECK(entropy_matrix(identity(single(3)), single(3)) == 0.0);
  CHECK(entropy_matrix(kAnchor, single(2)) == Approx(2 * std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(entropy_matrix(mat2(1, 0, 0, -0.1), single(2)), LabError);
  CHECK(entropy_matrix(mat2(1, 0, 0, -1e-12), single(2)) == 0.0);  // clamped rounding noise
}

TEST_CASE("phi map") {
  const auto A = single(2);
  const auto z = make_contraction(mat2(1, 0, 0, 0), A);
  CHECK(z.normal);
  const Element p = phi_map(kAnchor, z, A);
  CHECK(max_abs(p - mat2(1.5, 0, 0, 1.5)) < 1e-14);
  CHECK(entropy_matrix(p, A) == Approx(3 * std::log(1.5)));
  const PhiEntropy e = entropy_monotone_under_phi(kAnchor, z, A);
  CHECK(e.H_phi_h == Approx(1.216395324324493));
  CHECK(e.H_h == Approx(1.386294361119891));

  std::mt19937_64 rng(4);
  const auto B = single(3, 0.7);
  const Element h = random_psd(B, rng);
  const auto u = make_contraction(random_unitary(B, rng), B);
  CHECK(u.normal);
  CHECK(max_abs(phi_map(h, u, B) - adjoint(u.z) * h * u.z) < 1e-13);
  const PhiEntropy ue = entropy_monotone_under_phi(h, u, B);
  CHECK(ue.H_phi_h == Approx(ue.H_h).epsilon(1e-9));
  CHECK(max_abs(phi_map(h, make_contraction(identity(B), B), B) - h) < 1e-13);

  CHECK_THROWS_AS(make_contraction(Complex(2.0) * identity(B), B), LabError);
  const auto shift = make_contraction(mat2(0, 1, 0, 0), A);
  CHECK(!shift.normal);
  try {
    entropy_monotone_under_phi(kAnchor, shift, A);
    FAIL("non-normal contraction accepted");
  } catch (const LabError& err) {
    CHECK(err.code() == ErrorCode::non_normal);
  }
  // unital exactly when normal
  CHECK(max_abs(phi_map(identity(A), z, A) - identity(A)) < 1e-9);
  CHECK(max_abs(phi_map(identity(A), shift, A) - identity(A)) > 0.5);
}

TEST_CASE("polarization identity") {
  const WeightedMatrixAlgebra scalar = single(1);
  Element y{Eigen::MatrixXcd::Constant(1, 1, 2.0)}, h{Eigen::MatrixXcd::Constant(1, 1, 3.0)};
  CHECK(polarization_identity_check(y, h, scalar) < 1e-15);
  std::mt19937_64 rng(42);
  const auto A = single(4);
  CHECK(polarization_identity_check(random_general(A, rng), random_hermitian(A, rng), A) <= 1e-12);
  CHECK(polarization_identity_check(zero(A), random_psd(A, rng), A) <= 1e-15);
}

TEST_CASE("log monotonicity") {
  const auto A = single(2);
  CHECK(log_monotonicity_check(identity(A), mat2(std::exp(1.0), 0, 0, 1), A) == Approx(0).scale(1));
  CHECK(log_monotonicity_check(kAnchor, kAnchor, A) == Approx(0).scale(1));
  CHECK_THROWS_AS(log_monotonicity_check(mat2(0.5, 0, 0, 1), identity(A), A), LabError);
  CHECK_THROWS_AS(log_monotonicity_check(mat2(2, 0, 0, 2), identity(A), A), LabError);
  for (double t : {1e-3, 0.5, 1.0, 7.5, 1e4})
    CHECK(log_integral_representation(t) == Approx(std::log(t)).epsilon(1e-10).scale(1));
  std::mt19937_64 rng(2);
  for (double eps : {1e-3, 0.1, 2.0}) CHECK(shifted_log_residual(random_psd(single(3), rng), eps, single(3)) < 1e-12);
}

TEST_CASE("trace chain") {
  const auto A = single(2);
  const auto same = entropy_trace_monotonicity_check(kAnchor, kAnchor, A);
  CHECK(same.lhs == Approx(same.rhs));
  const auto step = entropy_trace_monotonicity_check(zero(A), mat2(1, 0, 0, 0), A);
  CHECK(step.lhs == 0.0);
  CHECK(step.rhs == Approx(2 * std::log(2.0)));
  CHECK(step.lhs <= step.middle);
  CHECK(step.middle <= step.rhs);
  CHECK_THROWS_AS(entropy_trace_monotonicity_check(mat2(1, 0, 0, 0), zero(A), A), LabError);
}

TEST_CASE("eigenvalue domination") {
  const auto A = single(2);
  const auto rows = eigenvalue_domination_check(mat2(3, 0, 0, 1), mat2(0, 1, 0, 0), A);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].theta == Approx(1));
  CHECK(rows[1].theta == Approx(0).scale(1));
  CHECK(rows[0].bound == Approx(3));
  CHECK(rows[1].bound == Approx(1));

  std::mt19937_64 rng(8);
  const auto B = WeightedMatrixAlgebra{{{3, 1.0}, {2, 0.5}}};
  const Element h = random_psd(B, rng);
  for (const auto& r : eigenvalue_domination_check(h, random_unitary(B, rng), B))
    CHECK(r.theta == Approx(r.bound).epsilon(1e-12));
}

TEST_CASE("randomized matrix properties") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto A = random_algebra(rng);
    const Element h = random_psd(A, rng);
    CHECK(tau(h, A).real() == Approx(1.0));
    CHECK(std::abs(entropy_matrix(h, A) - entropy(eig_spectral(h, A)).value.value()) <= 1e-9);
    const auto z = make_contraction(random_contraction(A, rng), A);
    CHECK(std::abs(tau(phi_map(h, z, A), A).real() - tau(h, A).real()) <= 1e-9);
    CHECK(min_eigenvalue(phi_map(h, z, A)) >= -1e-10);
    const Element h2 = h + random_psd(A, rng);
    for (const auto& r : weyl_domination_check(h, h2, A)) CHECK(r.theta <= r.bound + 1e-9);
    const double alpha = 0.1 + 0.05 * trial;
    CHECK(entropy_matrix(Complex(alpha) * h, A) ==
          Approx(alpha * std::log(alpha) * tau(h, A).real() + alpha * entropy_matrix(h, A)).epsilon(1e-11));
  }
}
