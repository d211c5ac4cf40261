// errors.hpp — exception types shared by every nvdac module

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nvdac {

// Bad argument or broken invariant on an input value.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Value outside a model's declared domain (pressure range, ruby wavelength).
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// No eigenstate carries more than half the weight of a requested basis label;
// usually means the Hamiltonian sits at a level anti-crossing.
class MixingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Single propagation step would rotate some phase by more than pi.
class StepSizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A fitter could not produce a starting point (no dips, flat trace, ...).
class InitializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Pulse-sequence DSL / config / CSV syntax error with a 1-based location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line_(line), column_(column), message_(what) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

} // namespace nvdac
