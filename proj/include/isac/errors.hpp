#pragma once

#include <stdexcept>
#include <string>

namespace isac {

// Invalid configuration or dimensions; CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Vehicle left the coverage region (d <= 0).
struct TrajectoryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace isac
