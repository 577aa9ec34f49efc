#include "segal/error.hpp"

#include <cstring>

#include "segal/extended_value.hpp"

namespace segal {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::negative_value: return "negative_value";
    case ErrorCode::nonpositive_weight: return "nonpositive_weight";
    case ErrorCode::duplicate_values: return "duplicate_values";
    case ErrorCode::trace_divergence: return "trace_divergence";
    case ErrorCode::declaration_mismatch: return "declaration_mismatch";
    case ErrorCode::algebra_trace_exceeded: return "algebra_trace_exceeded";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::not_alignable: return "not_alignable";
    case ErrorCode::infinite_trace: return "infinite_trace";
    case ErrorCode::not_finite: return "not_finite";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::quadrature_failure: return "quadrature_failure";
    case ErrorCode::eigensolver_failure: return "eigensolver_failure";
    case ErrorCode::not_psd: return "not_psd";
    case ErrorCode::norm_violation: return "norm_violation";
    case ErrorCode::non_normal: return "non_normal";
    case ErrorCode::moment_violation: return "moment_violation";
    case ErrorCode::insufficient_trace: return "insufficient_trace";
    case ErrorCode::parse_error: return "parse_error";
  }
  return "unknown";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::finite: return "finite";
    case Verdict::plus_infinity: return "plus_infinity";
    case Verdict::minus_infinity: return "minus_infinity";
    case Verdict::undefined: return "undefined";
  }
  return "?";
}

bool parse_verdict(const char* text, Verdict& out) {
  for (auto v : {Verdict::finite, Verdict::plus_infinity, Verdict::minus_infinity, Verdict::undefined}) {
    if (std::strcmp(text, to_string(v)) == 0) {
      out = v;
      return true;
    }
  }
  return false;
}

}  // namespace segal
