#pragma once

#include <stdexcept>
#include <string>

namespace varexp {

// Error categories surfaced by the core. The C API maps each one to a
// distinct status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed spec string, precondition violation, bad configuration.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// State outside the domain of a coefficient (negative or non-finite x).
class DomainError : public Error {
public:
    using Error::Error;
};

// Exponent function violating 1/2 <= p <= 1.
class HypothesisViolation : public Error {
public:
    using Error::Error;
};

// Overflow or non-finite value produced during a computation.
class NumericError : public Error {
public:
    using Error::Error;
};

// Requested allocation above the documented size limit.
class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace varexp
