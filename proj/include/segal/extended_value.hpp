#pragma once

#include <cmath>
#include <limits>

namespace segal {

enum class Verdict { finite, plus_infinity, minus_infinity, undefined };

const char* to_string(Verdict v);
bool parse_verdict(const char* text, Verdict& out);

// An integral split at t = 1 into its nonnegative and nonpositive halves, so
// that +inf - inf is representable instead of collapsing to NaN.
struct ExtendedEntropyValue {
  double positive_part = 0.0;  // in [0, +inf]
  double negative_part = 0.0;  // in [-inf, 0]

  static ExtendedEntropyValue finite(double v) {
    return v >= 0.0 ? ExtendedEntropyValue{v, 0.0} : ExtendedEntropyValue{0.0, v};
  }

  Verdict verdict() const {
    const bool up = std::isinf(positive_part);
    const bool down = std::isinf(negative_part);
    if (up && down) return Verdict::undefined;
    if (up) return Verdict::plus_infinity;
    if (down) return Verdict::minus_infinity;
    return Verdict::finite;
  }

  bool is_finite() const { return verdict() == Verdict::finite; }

  /// Scalar value; NaN when undefined.
  double value() const {
    if (verdict() == Verdict::undefined) return std::numeric_limits<double>::quiet_NaN();
    return positive_part + negative_part;
  }

  ExtendedEntropyValue operator-() const { return {-negative_part, -positive_part}; }

  ExtendedEntropyValue& operator+=(const ExtendedEntropyValue& o) {
    positive_part += o.positive_part;
    negative_part += o.negative_part;
    return *this;
  }
};

inline ExtendedEntropyValue operator+(ExtendedEntropyValue a, const ExtendedEntropyValue& b) {
  return a += b;
}

}  // namespace segal
