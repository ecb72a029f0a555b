#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace erqt {

enum class ErrorCode {
  InvalidBias,
  InvalidParameter,
  NotProportional,
  UnsupportedKind,
  SingularMatrix,
  QuadratureFailure,
  UndampedSubspace,
  InvalidOccupancy,
  DimensionMismatch,
  StepSize,
  Parse,
  Validation,
  Io,
};

/// Stable snake_case name, used for CSV diagnostics.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown when adaptive quadrature exhausts its subdivision budget. The best
/// estimate reached so far is kept so callers can still report it.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double best_value, double best_error)
      : Error(ErrorCode::QuadratureFailure, what),
        best_value_(best_value),
        best_error_(best_error) {}

  double best_value() const noexcept { return best_value_; }
  double best_error() const noexcept { return best_error_; }

 private:
  double best_value_;
  double best_error_;
};

}  // namespace erqt
