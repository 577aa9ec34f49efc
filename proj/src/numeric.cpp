#include "segal/numeric.hpp"

namespace segal {

double inverse_square_tail(double n) {
  NeumaierSum head;
  while (n < 16.0) {
    head.add(1.0 / (n * n));
    n += 1.0;
  }
  const double x = 1.0 / n;
  const double x2 = x * x;
  // asymptotic expansion of the trigamma function
  const double tail =
      x + x2 / 2.0 + x2 * x / 6.0 - x2 * x2 * x / 30.0 + x2 * x2 * x2 * x / 42.0 -
      x2 * x2 * x2 * x2 * x / 30.0;
  head.add(tail);
  return head.value();
}

double log_over_square_tail(double n) {
  NeumaierSum head;
  while (n < 1024.0) {
    head.add(std::log(n) / (n * n));
    n += 1.0;
  }
  // Euler-Maclaurin with f = log x / x^2
  const double l = std::log(n);
  const double integral = (l + 1.0) / n;
  const double f = l / (n * n);
  const double f1 = (1.0 - 2.0 * l) / (n * n * n);
  const double f3 = (26.0 - 24.0 * l) / (n * n * n * n * n);
  head.add(integral + f / 2.0 - f1 / 12.0 + f3 / 720.0);
  return head.value();
}

double harmonic(double n) {
  if (n < 1.0) return 0.0;
  if (n <= 1e6) {
    NeumaierSum s;
    for (double k = n; k >= 1.0; k -= 1.0) s.add(1.0 / k);
    return s.value();
  }
  const double x = 1.0 / n;
  return std::log(n) + kEulerGamma + x / 2.0 - x * x / 12.0 + x * x * x * x / 120.0;
}

}  // namespace segal
