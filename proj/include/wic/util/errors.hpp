#pragma once

#include <stdexcept>
#include <string>

namespace wic {

// Shape mismatch between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration (head count, layer policy, filter constants, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Caller violated an operation's precondition.
struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed or truncated file.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite value detected in a numeric routine.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Statistic that is undefined for the given input (e.g. zero variance).
struct UndefinedStatistic : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace wic
