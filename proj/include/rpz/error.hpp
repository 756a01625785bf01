#pragma once

#include <stdexcept>
#include <string>

namespace rpz {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or malformed input.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Requested combination is not supported by the built-in machinery.
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Orthogonalization broke down: the node set cannot support the requested degree.
class RankError : public Error {
public:
    using Error::Error;
};

/// A statistic is undefined for the given input (e.g. all coefficients zero).
class UndefinedStatisticError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace rpz
