#pragma once

#include <stdexcept>
#include <string>

namespace dsel {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Matrix or vector dimensions do not agree.
class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Predictor normal equations are singular (alpha_t = alpha_f = 1).
class SingularSystemError : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Water-filling was asked to allocate power over an all-zero spectrum.
class NoSignalError : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Experiment configuration could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace dsel
