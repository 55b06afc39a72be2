#ifndef BITPRUNE_ERROR_HPP
#define BITPRUNE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bitprune {

// Error categories map 1:1 onto CLI exit codes (see cli.hpp).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (bad magic, truncated payload,
// manifest chain mismatch, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or parameter ranges.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric failure (Cholesky breakdown, non-finite input, ...).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace bitprune

#endif
