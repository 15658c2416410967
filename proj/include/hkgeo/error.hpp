#pragma once

#include <stdexcept>
#include <string>

namespace hkgeo {

enum class ErrorCode {
  invalid_argument,
  domain,          // point outside the metric domain, or a path left it
  degenerate,      // singular metric / Jacobian, coincident endpoints
  no_convergence,  // iterative solver gave up
  numerical,       // non-finite state
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(ErrorCode::no_convergence, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hkgeo
