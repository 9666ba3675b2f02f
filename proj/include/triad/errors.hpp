#pragma once

#include <stdexcept>
#include <string>

namespace triad {

// Precondition violations use std::domain_error / std::invalid_argument.
// The types below mark failures that callers commonly branch on.

/// Lieb-Liniger denominator at the confinement-induced resonance.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every multi-start of a rate fit failed to converge.
class FitFailure : public std::runtime_error {
 public:
  FitFailure(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace triad
