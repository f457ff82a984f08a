#pragma once

#include <stdexcept>
#include <string>

namespace fidvr {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input or configuration rejected; message starts with the offending field.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& problem)
        : Error(field + ": " + problem), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Voltage magnitude too low for a constant-power admittance evaluation.
class DegenerateVoltageError : public Error {
public:
    using Error::Error;
};

/// Branch combination has no usable equivalent (zero series sum, zero feeder).
class SingularNetworkError : public Error {
public:
    using Error::Error;
};

/// Fixed-point voltage solve did not converge; reported, never clamped.
class VoltageCollapseError : public Error {
public:
    using Error::Error;
};

/// Conductance trace has no post-fault plateau to time.
class NotAFidvrError : public Error {
public:
    using Error::Error;
};

/// Stream does not cover the window an estimator needs.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Regression input cannot identify a line (too few or coincident abscissae).
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

/// Disconnection quadratic has no physically realizable root for the target.
class InfeasibleTargetError : public Error {
public:
    using Error::Error;
};

/// Motor-base conversion requested with no motor-D stock configured.
class NoMotorError : public Error {
public:
    using Error::Error;
};

}  // namespace fidvr
