#pragma once

#include <stdexcept>
#include <string>

namespace doppler {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_argument"; }
};

/// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double estimate, double error_bound)
        : Error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }
    const char* kind() const noexcept override { return "convergence"; }

private:
    double estimate_;
    double error_bound_;
};

/// gcd(a, m) != 1; raised when CRT moduli are not pairwise coprime.
class NotInvertible : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "not_invertible"; }
};

/// A frequency or delay falls outside the unambiguous window it must live in.
class OutOfWindow : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "out_of_window"; }
};

/// No unfolded candidate fits inside the subpulse Doppler window.
class WindowExceeded : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "window_exceeded"; }
};

/// A closed-form evaluation left its valid parameter regime.
class NumericalDomain : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numerical_domain"; }
};

class ParseError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "parse"; }
};

/// Configuration failed a cross-field check. `field()` names the offender.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }
    const char* kind() const noexcept override { return "validation"; }

private:
    std::string field_;
};

}  // namespace doppler
