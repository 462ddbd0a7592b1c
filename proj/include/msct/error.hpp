#pragma once

#include <stdexcept>
#include <string>

namespace msct {

// Base of every error raised by the library. The CLI maps the subclasses
// onto exit codes (validation 2, I/O 3, anything else 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed container header or magic.
class FormatError : public Error {
public:
    using Error::Error;
};

// Declared payload larger than what the file holds.
class TruncationError : public Error {
public:
    using Error::Error;
};

// Data violates a type invariant (non-finite values, bad axis, size mismatch).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Argument outside the operation's domain (n_out == 0, empty selection, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace msct
