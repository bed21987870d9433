#pragma once

#include <stdexcept>
#include <string>

namespace trapsim {

// Bad numeric input, malformed argument, degenerate data.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Configuration file / schema violations.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure during evaluation (non-finite model output etc.).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem / serialization failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace trapsim
