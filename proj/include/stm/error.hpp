#pragma once

#include <stdexcept>
#include <string>

namespace stm {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or geometry supplied by the caller.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Domain/mesh construction failures (origin outside, degenerate polygon, ...).
class GeometryError : public Error {
public:
    using Error::Error;
};

// Linear or eigen solver failures, resonant shifts.
class SolverError : public Error {
public:
    using Error::Error;
};

#define STM_REQUIRE(cond, ExceptionType, message)                        \
    do {                                                                 \
        if (!(cond)) throw ExceptionType(std::string(message));          \
    } while (false)

} // namespace stm
