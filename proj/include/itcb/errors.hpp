#pragma once

#include <stdexcept>
#include <string>

namespace itcb {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Floating-point breakdown (e.g. a covariance that stays indefinite after jitter).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A problem instance too large for exact planning.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Invalid experiment configuration. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace itcb
