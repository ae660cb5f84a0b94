#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace canhmm {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input text; carries the offending line and the column where
// parsing stopped making sense.
class ParseError : public Error {
public:
    ParseError(std::string line, std::size_t column, const std::string& what)
        : Error(what + " at column " + std::to_string(column) + " in: " + line),
          line_(std::move(line)),
          column_(column) {}

    const std::string& line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::string line_;
    std::size_t column_;
};

// A frame payload longer than the bus allows.
class PayloadLengthError : public ParseError {
public:
    using ParseError::ParseError;
};

// A recognized diagnostic response that is too short for its formula.
class DecodeError : public Error {
public:
    using Error::Error;
};

// Model or data structure invariant violations.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Bad or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// An observation sequence with probability zero under the model, where the
// caller asked for something (a state path) that does not exist.
class ImpossibleSequenceError : public Error {
public:
    using Error::Error;
};

}  // namespace canhmm
