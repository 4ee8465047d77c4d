#ifndef CRT_ERROR_HPP
#define CRT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace crt {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on arguments was violated (bad angle, bad dimension, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Two fields were combined whose grids differ.
class ShapeMismatch : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable file content.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace crt

#endif
