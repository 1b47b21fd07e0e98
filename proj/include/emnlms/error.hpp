#ifndef EMNLMS_ERROR_HPP
#define EMNLMS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace emnlms {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector arguments whose lengths do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A parameter outside its documented domain (negative variance, empty signal, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The inputs admit no meaningful result (zero-energy echo, 0/0 ensemble ratio, zero reference).
class DegenerateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Unparseable content in a text input (CSV, config).
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace emnlms

#endif  // EMNLMS_ERROR_HPP
