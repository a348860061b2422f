#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pwsfold {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte position of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

enum class EvalErrorKind { division_by_zero, domain, non_finite };

class EvalError : public Error {
public:
    EvalError(EvalErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}

    EvalErrorKind kind() const noexcept { return kind_; }

private:
    EvalErrorKind kind_;
};

/// Invalid user input or violated precondition (CLI exit code 2).
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: step underflow, budget exhaustion, non-convergence (CLI exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The requested quantity does not exist for degenerate input
/// (alpha = 0, classification boundary, non-hyperbolic point).
class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace pwsfold
