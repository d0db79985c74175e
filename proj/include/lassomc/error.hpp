#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lassomc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid numeric parameter (negative scale, bad split fraction, S not dividing N...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Mismatched vector/matrix dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Not enough data points for the requested statistic.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Input outside the support of a function (e.g. Sobol input not in [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A requested object would be too large (e.g. PCE basis size beyond the cap).
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Bad experiment configuration (unknown problem/method id, malformed file).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class FileError : public Error {
public:
    using Error::Error;
};

/// Coordinate descent did not converge within its sweep budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::size_t sweeps, double last_max_change)
        : Error(what), sweeps_(sweeps), last_max_change_(last_max_change) {}

    std::size_t sweeps() const noexcept { return sweeps_; }
    double last_max_change() const noexcept { return last_max_change_; }

private:
    std::size_t sweeps_;
    double last_max_change_;
};

/// The adaptive ODE integrator failed (step size underflow or step budget exhausted).
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double t, double step)
        : Error(what), t_(t), step_(step) {}

    double time() const noexcept { return t_; }
    double step() const noexcept { return step_; }

private:
    double t_;
    double step_;
};

}  // namespace lassomc
