#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace segal {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Compensated (Neumaier) summation.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  NeumaierSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

/// t log t with the convention 0 log 0 = 0.
inline double xlogx(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }

struct QuadratureSettings {
  std::size_t max_subdivisions = std::size_t{1} << 16;
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t subdivisions = 0;
  bool converged = false;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kKronrodNodes[j];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[j] * s;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * s;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod quadrature by repeated bisection of the worst panel.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSettings& settings = {}) {
  std::vector<detail::Panel> heap;
  heap.push_back(detail::gk15(f, a, b));
  double total_error = heap.front().error;
  double total_value = heap.front().value;
  std::size_t subdivisions = 1;
  auto resum = [&heap, &total_error, &total_value] {
    NeumaierSum v, e;
    for (const auto& p : heap) {
      v.add(p.value);
      e.add(p.error);
    }
    total_value = v.value();
    total_error = e.value();
  };
  auto target = [&settings](double value) {
    return std::max(settings.abs_tol, settings.rel_tol * std::abs(value));
  };
  while (subdivisions < settings.max_subdivisions) {
    if (total_error <= target(total_value)) {
      resum();
      if (total_error <= target(total_value)) return {total_value, total_error, subdivisions, true};
    }
    std::pop_heap(heap.begin(), heap.end());
    const auto worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval exhausted in floating point; keep the panel and stop.
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    total_error += left.error + right.error - worst.error;
    total_value += left.value + right.value - worst.value;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
    ++subdivisions;
    if (subdivisions % 256 == 0) resum();
  }
  resum();
  return {total_value, total_error, subdivisions, total_error <= target(total_value)};
}

/// Integral of f over [a, inf) through x = a + u/(1-u).
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, const QuadratureSettings& settings = {}) {
  auto g = [&f, a](double u) {
    if (u >= 1.0) return 0.0;
    const double one_minus = 1.0 - u;
    const double value = f(a + u / one_minus);
    return value / (one_minus * one_minus);
  };
  return integrate(g, 0.0, 1.0, settings);
}

// Series over the integers with closed or asymptotic tails.

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kPiSquaredOverSix = 1.64493406684822643647;
/// -zeta'(2) = sum_{k>=1} log(k)/k^2.
inline constexpr double kLogOverSquareSum = 0.93754825431584375370;

/// sum_{k >= n} 1/k^2 (trigamma at n), n >= 1.
double inverse_square_tail(double n);
/// sum_{k >= n} log(k)/k^2, n >= 1.
double log_over_square_tail(double n);
/// H_n = sum_{k=1}^{n} 1/k, n >= 0.
double harmonic(double n);

}  // namespace segal
