#pragma once

#include <stdexcept>
#include <string>

namespace sced {

// Base class for every error raised by this library. Solver statuses
// (infeasible / unbounded) are returned as values, not thrown; see lp.hpp.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NoSignChange : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class DisconnectedNetwork : public Error {
public:
    using Error::Error;
};

class InvalidSigma : public Error {
public:
    using Error::Error;
};

class InvalidSplit : public Error {
public:
    using Error::Error;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

class DimensionTooHigh : public Error {
public:
    using Error::Error;
};

class EmptyHoldout : public Error {
public:
    using Error::Error;
};

class UnknownGroup : public Error {
public:
    using Error::Error;
};

class NumericalBreakdown : public Error {
public:
    using Error::Error;
};

class RequiresOptimal : public Error {
public:
    using Error::Error;
};

class MissingHalfspaces : public Error {
public:
    using Error::Error;
};

class InvalidPolytope : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class RootBracketFailure : public Error {
public:
    using Error::Error;
};

class TargetUnreachable : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace sced
