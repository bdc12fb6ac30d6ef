#pragma once

#include <stdexcept>
#include <string>

namespace softshift {

// Base class for every error raised by the library. Each subclass maps to one
// failure mode named in the module contracts.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// exp() argument would leave the guarded range |t| <= 700.
class OverflowRisk : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

// A hypothesis of a lemma/theorem (or a pair invariant) does not hold.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class SamplerExhausted : public Error {
 public:
  using Error::Error;
};

class ScaleExceeded : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace softshift
