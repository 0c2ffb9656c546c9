#pragma once

#include <stdexcept>
#include <string>

namespace afi {

/// Malformed data handed to an operation (NaN entries, shape mismatch, asymmetry).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numeric parameter outside its documented domain.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation called in the wrong order (e.g. backward before forward).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or parameter.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t iteration, const std::string& what)
        : std::runtime_error(what), iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

}  // namespace afi
