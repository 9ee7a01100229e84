#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptrap {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value; `field()` is the dotted JSON path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// An operation was called with arguments outside its contract.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A numeric procedure failed to converge or produced non-finite state.
class NumericError : public Error {
public:
    using Error::Error;
};

class SolverNotConvergedError : public NumericError {
public:
    SolverNotConvergedError(double residual, std::size_t iterations)
        : NumericError("Laplace solver did not converge after " + std::to_string(iterations)
                       + " iterations (residual " + std::to_string(residual) + ")"),
          residual_(residual), iterations_(iterations) {}
    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

class NoPeakError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Operating point outside the first stability region, or an ion escaped.
class InstabilityError : public Error {
public:
    using Error::Error;
};

}  // namespace ptrap
