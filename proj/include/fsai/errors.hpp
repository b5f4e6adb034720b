#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fsai {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class StructureError : public Error {
public:
    using Error::Error;
};

class DuplicateEntryError : public StructureError {
public:
    using StructureError::StructureError;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Raised when a factorization or preconditioner meets a non-positive or zero pivot.
/// `index()` is the offending row/column (0-based).
class SingularError : public Error {
public:
    SingularError(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class NotSpdError : public SingularError {
public:
    using SingularError::SingularError;
};

class BreakdownError : public SingularError {
public:
    using SingularError::SingularError;
};

class NumericalBreakdown : public Error {
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

/// An iterative solve stopped at max_iter. `step()` is the time step that
/// failed when raised by the free-surface stepper, 0 otherwise.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

} // namespace fsai
