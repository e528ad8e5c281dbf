#pragma once

#include <stdexcept>
#include <string>

namespace fvdeg {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidMesh,
  InvalidModel,
  InvalidData,
  Domain,
  Parameter,
  Convergence,
  Parse,
  Io,
  Verification,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the nonlinear solver; carries the last residual max-norm.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int step = -1)
      : Error(ErrorKind::Convergence, what), last_residual_(last_residual), step_(step) {}
  double last_residual() const noexcept { return last_residual_; }
  int step() const noexcept { return step_; }

 private:
  double last_residual_;
  int step_;
};

const char* to_string(ErrorKind kind);

}  // namespace fvdeg
