#pragma once

#include <stdexcept>
#include <string>

namespace specloc {

/// Command-line flags that cannot be combined or are missing.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data or configuration violates a documented precondition.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input; the message carries file/line context.
class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A random construction could not satisfy its constraints within the
/// retry budget (e.g. a connected sample was requested but never drawn).
class GenerationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Non-finite values or a failed numeric check during computation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem or stream failure; the message names the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace specloc
