#pragma once

#include <stdexcept>
#include <string>

namespace dephkit {

/// Shapes or dimensions of the operands do not fit together.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition on the values (not the shapes) was violated.
class ContractError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// The operation is only defined for a particular system dimension.
class UnsupportedDimensionError : public ContractError {
public:
  using ContractError::ContractError;
};

/// A value failed validation against the invariants of its type.
///
/// `invariant()` names the violated property (e.g. "unit diagonal") and
/// `deviation()` is the measured size of the violation.
class ValidationError : public ContractError {
public:
  ValidationError(std::string invariant, double deviation, const std::string &what)
      : ContractError(what), invariant_(std::move(invariant)), deviation_(deviation) {}

  const std::string &invariant() const noexcept { return invariant_; }
  double deviation() const noexcept { return deviation_; }

private:
  std::string invariant_;
  double deviation_;
};

/// The encode/decode/memory triple does not realize a dephasing superchannel.
class NotDephasingRealizationError : public ContractError {
public:
  NotDephasingRealizationError(std::string condition, double violation,
                               const std::string &what)
      : ContractError(what), condition_(std::move(condition)), violation_(violation) {}

  const std::string &condition() const noexcept { return condition_; }
  double violation() const noexcept { return violation_; }

private:
  std::string condition_;
  double violation_;
};

/// An iterative search stopped without reaching the requested accuracy.
class SearchFailureError : public std::runtime_error {
public:
  SearchFailureError(double residual, const std::string &what)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

} // namespace dephkit
