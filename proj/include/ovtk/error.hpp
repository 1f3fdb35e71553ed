#pragma once

#include <stdexcept>
#include <string>

namespace ovtk {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document. The message carries the location (line or JSON path).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input parsed but violates a data-model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Source-format conversion failure (unknown category, bad record, merge conflict).
class ConversionError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace ovtk
