#pragma once

#include <stdexcept>
#include <string>

namespace gmf {

/// Raised for malformed or inconsistent user input.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot meet its contract
/// (non-convergence, singular or indefinite matrices, bad conditioning).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a density class admits no feasible member.
class InfeasibleClassError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gmf
