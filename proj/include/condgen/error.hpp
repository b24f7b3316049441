#pragma once

#include <stdexcept>
#include <string>

namespace condgen {

/// Base class for all condgen errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a declared invariant (bad CSV cell, rating out of range, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Dataset does not match the declared schema (missing column, unknown attribute).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A model, plan or run configuration is inconsistent or incomplete.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A model was evaluated outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Not enough samples to perform a fit.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Filesystem level problem (missing file, unreadable, empty).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace condgen
