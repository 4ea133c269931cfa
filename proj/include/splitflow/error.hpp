#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace splitflow {

/// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (bad fraction, empty input, shard too small...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be processed (negative samples, rank-deficient design).
class DataError : public Error {
public:
    using Error::Error;
};

/// Request would exceed a configured resource cap.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Evaluation at a point where the quantity is undefined (pdf at a point mass).
class UnsupportedPointError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Non-convergent quadrature. Carries the achieved estimate and its error bound.
class NumericError : public Error {
public:
    NumericError(const std::string& what, double estimate, double error_bound)
        : Error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

/// Iterative solver ran out of iterations. Carries the last iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate)
        : Error(what), last_iterate_(std::move(last_iterate)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    std::vector<double> last_iterate_;
};

/// Socket, file or child-process failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace splitflow
