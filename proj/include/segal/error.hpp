#pragma once

#include <stdexcept>
#include <string>

namespace segal {

enum class ErrorCode {
  negative_value,
  nonpositive_weight,
  duplicate_values,
  trace_divergence,
  declaration_mismatch,
  algebra_trace_exceeded,
  invalid_argument,
  not_alignable,
  infinite_trace,
  not_finite,
  precondition,
  unsupported,
  quadrature_failure,
  eigensolver_failure,
  not_psd,
  norm_violation,
  non_normal,
  moment_violation,
  insufficient_trace,
  parse_error,
};

const char* to_string(ErrorCode code);

class LabError : public std::runtime_error {
 public:
  LabError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace segal
