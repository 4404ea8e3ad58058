// errors.hpp: exception hierarchy shared by every nmqc module

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nmqc {

// Argument outside the mathematical domain of an operation (negative frequency, tau <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Input object violates a documented invariant (non-Hermitian density matrix, bad config field, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Time lookup outside a tabulated range.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Allocation request above the configured memory budget.
class ResourceError : public std::runtime_error {
public:
    ResourceError(std::size_t requested, std::size_t available);

    std::size_t requested() const noexcept { return requested_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t requested_;
    std::size_t available_;
};

// Non-finite state produced by a stochastic step. Carries the step context.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t, double x, double y, double z, double ux, double uy);

    double t;
    double x, y, z;
    double ux, uy;
};

// Malformed configuration document; line/column are 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0, int column = 0);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace nmqc
