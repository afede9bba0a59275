#pragma once

#include <stdexcept>
#include <string>

namespace lgnn {

/// Base for every error thrown by the library. `kind()` is a stable
/// machine-readable tag used by the CLI's structured error line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Invalid argument value (probabilities outside [0,1], odd k, ...).
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

/// Matrix dimensions that do not chain.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

/// Malformed input file; message carries the location.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error("parse", what) {}
};

/// Mathematically undefined request (e.g. smallest non-zero singular value of 0).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

}  // namespace lgnn
