#pragma once

#include <stdexcept>
#include <string>

namespace nmdeg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite entries, malformed parameters, states outside the Bloch ball.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Two inputs that must differ are equal (e.g. identical states for an
/// information-flow probe).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// The requested quantity is not defined for this trajectory (e.g. entropy
/// monotonicity on a non-unital map).
class NotApplicable : public Error {
public:
    using Error::Error;
};

/// NaN/Inf produced during integration or a linear solve.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Raised when a dynamical map is too ill-conditioned to be inverted, so the
/// propagator between two times cannot be extracted.
class SingularMap : public Error {
public:
    SingularMap(double condition_number, double time)
        : Error("dynamical map is numerically singular at t=" + std::to_string(time) +
                " (condition number " + std::to_string(condition_number) + ")"),
          condition_number_(condition_number),
          time_(time) {}

    double condition_number() const noexcept { return condition_number_; }
    double time() const noexcept { return time_; }

private:
    double condition_number_;
    double time_;
};

} // namespace nmdeg
