#ifndef UAVTRACK_ERRORS_HPP
#define UAVTRACK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace uavtrack {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two positions coincide where a direction is required.
class CoincidentPointsError : public Error {
public:
    using Error::Error;
};

/// A direction has no usable horizontal component (departure angle undefined).
class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

/// Spatial angles at or beyond the horizon, u^2 + v^2 >= 1.
class HorizonError : public Error {
public:
    using Error::Error;
};

/// A configuration value violates its documented invariant.
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

/// The candidate grid is empty after clipping to the visible region.
class EmptyCandidateSetError : public Error {
public:
    using Error::Error;
};

/// Kernel matrix could not be factorized even after jitter escalation.
class NotPositiveDefiniteError : public Error {
public:
    using Error::Error;
};

/// Tracker used before the first GPS fix.
class UninitializedTrackError : public Error {
public:
    using Error::Error;
};

/// Angle error outside the main lobe where the closed-form prediction holds.
class OutOfMainLobeError : public Error {
public:
    using Error::Error;
};

/// Scenario configuration could not be parsed or validated.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Reading or writing campaign artifacts failed.
class IoError : public Error {
public:
    using Error::Error;
};

/// A figure table needs a sweep axis the summary does not contain.
class MissingSweepError : public Error {
public:
    MissingSweepError(std::string figure, std::string axis)
        : Error("figure " + figure + " needs a sweep over '" + axis + "' which the summary does not contain"),
          axis_(std::move(axis))
    {
    }

    const std::string& axis() const noexcept { return axis_; }

private:
    std::string axis_;
};

} // namespace uavtrack

#endif
