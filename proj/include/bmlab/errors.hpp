#pragma once

#include <stdexcept>
#include <string>

namespace bmlab {

// Raised for invalid parameters, malformed configuration keys, or values
// outside their documented ranges. The command-line driver maps this to
// exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for malformed input files, inconsistent map structures, or inputs a
// statistic cannot be computed on (for example, a map too small for the
// requested ball radii). The command-line driver maps this to exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bmlab
