#pragma once

#include <stdexcept>
#include <string>

namespace sdpoisson {

/// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Adaptive quadrature did not reach the requested tolerance.
/// Carries the best estimate reached before giving up.
class IntegrationError : public std::runtime_error {
  public:
    IntegrationError(const std::string& what, double best_estimate, double error_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

  private:
    double best_estimate_;
    double error_estimate_;
};

/// Two evaluation routes that must agree did not.
class ConsistencyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A counting query landed beyond the last simulated arrival.
class PathExhaustedError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

}  // namespace sdpoisson
