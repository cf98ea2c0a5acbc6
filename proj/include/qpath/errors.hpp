#pragma once

#include <stdexcept>
#include <string>

namespace qpath {

// Thrown when a closed-form update produces non-finite state parameters.
class NumericRangeError : public std::runtime_error {
public:
    explicit NumericRangeError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown for invalid or inconsistent experiment configurations.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qpath
