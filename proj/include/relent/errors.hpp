#pragma once

#include <stdexcept>
#include <string>

namespace relent {

// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An input violates a documented invariant (Hermiticity, trace, unitarity, PSD).
class ValidationError : public Error {
public:
    using Error::Error;
};

// A scalar function is undefined on some eigenvalue.
class DomainError : public Error {
public:
    using Error::Error;
};

// A dense operator would exceed the configured dimension cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

// An operator that must be invertible is (numerically) singular.
class RankError : public Error {
public:
    using Error::Error;
};

// Bad argument: out-of-range site, mismatched dimension, unsupported scheme.
class ArgumentError : public Error {
public:
    using Error::Error;
};

}  // namespace relent
