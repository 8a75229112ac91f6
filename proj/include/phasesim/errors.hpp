#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phasesim {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad configuration, bad expression, invalid grid spec, model invariant
/// violations. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Expression syntax error with the byte offset of the offending token.
class ParseError : public ConfigError {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : ConfigError(msg + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// NaN/Inf detected, overflow guard tripped, domain error in evaluation.
/// CLI exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Snapshot/file I/O failure. CLI exit code 4.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace phasesim
