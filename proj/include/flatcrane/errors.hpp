#pragma once

#include <stdexcept>
#include <string>

namespace flatcrane {

/// Base class for all library failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument left the model's validity region (e.g. q3 outside [0, L]).
/// `index` carries the offending sequence/time index when one exists.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg, long index = -1)
        : Error(msg), index(index) {}
    long index;
};

/// A linear solve hit a (numerically) singular matrix.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& msg, double condition_estimate, long index = -1)
        : Error(msg + " (condition estimate " + std::to_string(condition_estimate) + ")"),
          condition_estimate(condition_estimate),
          index(index) {}
    double condition_estimate;
    long index;
};

/// Requested index lies outside a provider's declared window.
class WindowError : public Error {
public:
    explicit WindowError(const std::string& msg, long index = -1)
        : Error(msg), index(index) {}
    long index;
};

/// The transformed dynamics failed an affinity certificate; the model is
/// inconsistent with the assumed decoupled structure.
class DecouplingError : public Error {
public:
    using Error::Error;
};

/// Configuration parsing or validation failure.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File system failure (missing file, unwritable output path).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace flatcrane
