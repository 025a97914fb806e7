#pragma once

#include <stdexcept>
#include <string>

namespace shapeopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed mesh or config file. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A mesh violates a TriMesh invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A deformation would produce a triangle with area <= area_epsilon.
class StepTooLarge : public Error {
 public:
  using Error::Error;
};

/// Dirichlet data with nonzero net boundary flux.
class CompatibilityViolated : public Error {
 public:
  using Error::Error;
};

/// Sparse factorization failed or the residual contract was not met.
class SolverBreakdown : public Error {
 public:
  using Error::Error;
};

class LineSearchFailed : public Error {
 public:
  using Error::Error;
};

/// The target velocity is singular at the origin.
class OriginEvaluation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace shapeopt
