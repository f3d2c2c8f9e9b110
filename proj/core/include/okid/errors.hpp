#ifndef OKID_ERRORS_HPP
#define OKID_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace okid {

// Invalid or inconsistent configuration / arguments.  CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (divergence, singular factorization, ...).  CLI exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// File system / format failure.  CLI exit code 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace okid

#endif
