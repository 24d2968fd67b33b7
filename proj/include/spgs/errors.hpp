#pragma once

#include <stdexcept>
#include <string>

namespace spgs {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class DomainMismatch : public Error {
 public:
  using Error::Error;
};

class UnsupportedExponent : public Error {
 public:
  using Error::Error;
};

class InvalidScale : public Error {
 public:
  using Error::Error;
};

class OracleSize : public Error {
 public:
  using Error::Error;
};

/// Family/exponent/potential combination not allowed by the problem definition.
class SpecError : public Error {
 public:
  using Error::Error;
};

class UnsupportedCombination : public Error {
 public:
  using Error::Error;
};

class ZeroField : public Error {
 public:
  using Error::Error;
};

/// Scalar Nehari fiber requested where its root is not unique (p <= 3).
class NonUniqueFiber : public Error {
 public:
  using Error::Error;
};

class BubbleError : public Error {
 public:
  using Error::Error;
};

class InsufficientRange : public Error {
 public:
  using Error::Error;
};

/// Descent made no progress over the stagnation window.
class Stagnation : public Error {
 public:
  Stagnation(const std::string& what, std::string diagnostic)
      : Error(what), diagnostic_(std::move(diagnostic)) {}
  const std::string& diagnostic() const noexcept { return diagnostic_; }

 private:
  std::string diagnostic_;
};

}  // namespace spgs
