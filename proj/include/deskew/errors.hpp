#pragma once

#include <stdexcept>
#include <string>

namespace deskew {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Filesystem read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Unreadable or unsupported image encoding.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Page has no measurable foreground after binarization.
class NoContentError : public Error {
public:
    using Error::Error;
};

/// Unknown preset or key.
class LookupError : public Error {
public:
    using Error::Error;
};

} // namespace deskew
