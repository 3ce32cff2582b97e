#pragma once

#include <stdexcept>
#include <string>

namespace divopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid model parameters or configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the supported evaluation domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed to produce a trustworthy result.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Root finding could not bracket the requested target.
class BracketError : public NumericalError {
public:
    BracketError(const std::string& what, double lo, double hi, double f_lo, double f_hi)
        : NumericalError(what), lo(lo), hi(hi), f_lo(f_lo), f_hi(f_hi) {}
    double lo, hi, f_lo, f_hi;
};

}  // namespace divopt
