#pragma once

#include <stdexcept>
#include <string>

namespace crossimpact {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad command line or configuration (CLI exit code 1).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Input data is missing, unreadable or structurally invalid (exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not produce a result (exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace crossimpact
