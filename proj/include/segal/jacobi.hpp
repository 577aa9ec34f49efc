#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "segal/error.hpp"

namespace segal {

template <class Scalar>
struct HermitianEigen {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // columns, unitary
};

struct JacobiSettings {
  double off_tolerance = 1e-13;  // off-diagonal Frobenius norm relative to ||A||_F
  int max_sweeps = 100;
};

/// Cyclic Jacobi for Hermitian (real symmetric or complex) matrices. Each
/// rotation first removes the phase of a_pq, then applies the real rotation.
template <class Derived>
HermitianEigen<typename Derived::Scalar> jacobi_eigen(const Eigen::MatrixBase<Derived>& input,
                                                       const JacobiSettings& settings = {}) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename HermitianEigen<Scalar>::Matrix;
  using Eigen::numext::conj;
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw LabError(ErrorCode::invalid_argument, "eigensolver needs a square matrix");
  Matrix a = (input + input.adjoint()) / 2.0;
  Matrix v = Matrix::Identity(n, n);
  const double norm = a.norm();

  auto off = [&a, n] {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += std::norm(std::complex<double>(a(i, j)));
    return std::sqrt(s);
  };

  int sweep = 0;
  while (norm > 0.0 && off() > settings.off_tolerance * norm) {
    if (++sweep > settings.max_sweeps)
      throw LabError(ErrorCode::eigensolver_failure, "Jacobi sweeps exhausted");
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        const Scalar phase = apq / mag;
        const double app = std::real(std::complex<double>(a(p, p)));
        const double aqq = std::real(std::complex<double>(a(q, q)));
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // J = diag(1, conj(phase)) [[c, s], [-s, c]] on the (p, q) plane
        const Scalar jpp = c;
        const Scalar jpq = s;
        const Scalar jqp = -s * conj(phase);
        const Scalar jqq = c * conj(phase);
        for (Eigen::Index i = 0; i < n; ++i) {  // a <- a J
          const Scalar x = a(i, p);
          const Scalar y = a(i, q);
          a(i, p) = x * jpp + y * jqp;
          a(i, q) = x * jpq + y * jqq;
        }
        for (Eigen::Index j = 0; j < n; ++j) {  // a <- J^H a
          const Scalar x = a(p, j);
          const Scalar y = a(q, j);
          a(p, j) = conj(jpp) * x + conj(jqp) * y;
          a(q, j) = conj(jpq) * x + conj(jqq) * y;
        }
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
        for (Eigen::Index i = 0; i < n; ++i) {  // v <- v J
          const Scalar x = v(i, p);
          const Scalar y = v(i, q);
          v(i, p) = x * jpp + y * jqp;
          v(i, q) = x * jpq + y * jqq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&a](Eigen::Index i, Eigen::Index j) {
    return std::real(std::complex<double>(a(i, i))) < std::real(std::complex<double>(a(j, j)));
  });
  HermitianEigen<Scalar> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = std::real(std::complex<double>(a(order[k], order[k])));
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

}  // namespace segal
