#pragma once

#include <stdexcept>
#include <string>

namespace opshrink {

/// Input outside the mathematical domain of an operation (negative spike,
/// non-finite value, aspect ratio <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Observed singular value at or below the bulk edge 1 + sqrt(gamma); the
/// component carries no recoverable signal and must not be inverted.
class BelowBulkEdgeError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Caller passed arguments that are individually valid but inconsistent
/// (length or shape mismatch).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid experiment or model configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File was readable but its content does not match the declared format.
class FormatError : public IoError {
public:
    using IoError::IoError;
};

/// A mathematically impossible state was reached; indicates a bug.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace opshrink
