#pragma once

#include <stdexcept>
#include <string>

namespace vortexlab {

// Base for every error raised by the library. The CLI maps the two
// subclasses below onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid inputs: malformed domains, unreachable preconditions, bad files.
class InputError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure failed to meet its contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SolverError : public NumericalError {
 public:
  SolverError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace vortexlab
