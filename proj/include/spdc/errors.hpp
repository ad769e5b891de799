#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the domain where a formula is defined (wavelength range,
/// Sellmeier pole, arcsin argument, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A bracketed solve found no sign change, i.e. no phase-matching solution.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Pump grid and detector grid do not share pitch or pixel alignment.
class MismatchError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double final_residual)
      : Error(what), final_residual_(final_residual) {}
  double final_residual() const { return final_residual_; }

 private:
  double final_residual_;
};

class TotalInternalReflectionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Profile has two separated maxima; use detect_dual_rings instead.
class BimodalError : public Error {
 public:
  using Error::Error;
};

class NoTransitionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spdc
