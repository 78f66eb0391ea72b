#pragma once

#include <stdexcept>
#include <string>

namespace nxent {

// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain (x <= 0 for ln_q, q <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Mismatched vector lengths or grids.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Density vector that cannot be accepted as a Distribution.
class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

// The first distribution places mass where the second has none.
class AbsoluteContinuityError : public Error {
 public:
  using Error::Error;
};

// An iterative solve stopped without meeting its residual contract.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

// Expectation matching hit a nonpositive denominator in the target update.
class MatchingDegenerateError : public Error {
 public:
  using Error::Error;
};

// A problem or report file could not be parsed; the message carries the
// offending field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace nxent
