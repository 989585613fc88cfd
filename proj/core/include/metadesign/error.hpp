#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metadesign {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class EmptyMicrostructure : public Error {
public:
    EmptyMicrostructure() : Error("microstructure has no solid cells") {}
};

class SolverFailure : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class EmptySelection : public Error {
public:
    using Error::Error;
};

class NoFeasibleCandidate : public Error {
public:
    explicit NoFeasibleCandidate(std::string what, long element = -1)
        : Error(std::move(what)), element_(element) {}
    long element() const noexcept { return element_; }

private:
    long element_;
};

class TrainingDivergence : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class VersionMismatch : public Error {
public:
    using Error::Error;
};

class ChecksumFailure : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace metadesign
