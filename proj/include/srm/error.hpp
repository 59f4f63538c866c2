// Exception types shared by every module. The CLI maps ValidationError-like
// failures (bad inputs, inconsistent files) to exit code 2 and everything
// else to exit code 3.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace srm {

// Shape problems: length mismatches, dimension mismatches, malformed records.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (delta not in (0,1), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A value outside a declared range (returns outside [A, B]).
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Not enough transitions or too many sign vectors to enumerate.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what, std::size_t required, std::size_t available)
        : std::runtime_error(what + " (required " + std::to_string(required) + ", available " +
                             std::to_string(available) + ")"),
          required_(required), available_(available) {}

    std::size_t required() const noexcept { return required_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t required_;
    std::size_t available_;
};

class OptimizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration or file header rejected before any computation runs.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace srm
