#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace caplab {

enum class ErrorKind {
  invalid_spec,
  degenerate_family,
  unsupported_family,
  validation_failure,
  parse_error,
  degenerate_element,
  fit_failure,
  dimension_mismatch,
  invalid_mesh,
  invalid_angle,
  solver_failure,
  no_common_origin,
  constraint_violation,
  dependent_normals,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::degenerate_family: return "degenerate-family";
    case ErrorKind::unsupported_family: return "unsupported-family";
    case ErrorKind::validation_failure: return "validation-failure";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::degenerate_element: return "degenerate-element";
    case ErrorKind::fit_failure: return "fit-failure";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::invalid_mesh: return "invalid-mesh";
    case ErrorKind::invalid_angle: return "invalid-angle";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::no_common_origin: return "no-common-origin";
    case ErrorKind::constraint_violation: return "constraint-violation";
    case ErrorKind::dependent_normals: return "dependent-normals";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure in a CAPMESH or wall-set document. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::parse_error, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace caplab
