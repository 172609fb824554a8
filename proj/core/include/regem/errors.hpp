#pragma once

#include <stdexcept>
#include <string>

namespace regem {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (CSV, constraint JSON, report JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Normal equations (or a Jacobian) are rank deficient, so the requested
// parametric functions are not estimable.
class SingularError : public Error {
 public:
  using Error::Error;
};

// A request that cannot be satisfied for the given data or options
// (wrong missingness pattern, infeasible constraints, bad dimensions).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace regem
