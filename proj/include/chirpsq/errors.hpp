#pragma once

#include <stdexcept>
#include <string>

namespace chirpsq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical or physical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The frequency is not quasi-phase-matched anywhere in the crystal.
class OutOfBandError : public Error {
public:
    using Error::Error;
};

/// K'(z_pm) vanishes, so the layer approximation has no meaning there.
class SingularProfileError : public Error {
public:
    using Error::Error;
};

/// A certified computation lost accuracy (Wronskian drift, unitarity drift).
class AccuracyLossError : public Error {
public:
    AccuracyLossError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Adaptive integration step collapsed below the representable scale.
class StiffnessError : public Error {
public:
    using Error::Error;
};

/// Requested delay law cannot be realized by a monotonic positive profile.
class DesignInfeasibleError : public Error {
public:
    using Error::Error;
};

/// Adjacent angle samples are too far apart to pick a branch.
class UnwrapError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration; carries the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace chirpsq
