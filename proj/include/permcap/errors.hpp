#pragma once

#include <stdexcept>
#include <string>

namespace permcap {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature did not reach its tolerance within the subdivision budget.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}

  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

/// Exact enumeration requested for an orbit larger than the configured cap.
class OrbitTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed or inconsistent input data (files, labels, gene sets).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data that is well formed but carries no information (zero variance).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace permcap
