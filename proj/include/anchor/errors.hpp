#pragma once

#include <stdexcept>
#include <string>

namespace anchor {

// Invalid data fed to an operation (non-finite values, bad shapes, bad files).
// The CLI maps this family to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (out-of-range hyperparameters, indivisible widths).
class ConfigError : public ValidationError {
public:
    explicit ConfigError(const std::string& msg) : ValidationError(msg) {}
};

// Spectral energy is identically zero after DC removal: a constant input has
// no dominant period.  Distinct type so callers can fall back (FGDM uses T=1).
class NoPeriodicityError : public ValidationError {
public:
    explicit NoPeriodicityError(const std::string& msg) : ValidationError(msg) {}
};

}  // namespace anchor
