#pragma once

#include <stdexcept>
#include <string>

namespace abcr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector/matrix size mismatches and ill-shaped inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values (bad tolerances, non-square n, malformed config files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Fewer data points than an estimator needs.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Statistically degenerate outcome (all-identical samples, zero-mass oracle, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Numerical failure (quadrature non-convergence, singular solve without fallback).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Inputs outside a function's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Asked for a prediction outside the regime a formula covers.
class UnsupportedRegimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace abcr
