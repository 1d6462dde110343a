#pragma once

#include <stdexcept>
#include <string>

namespace mussel {

/// Failure categories. The CLI maps each one to a distinct exit status.
enum class ErrorKind {
    invalid_argument,
    hypothesis_violation,
    numerical_failure,
    io_failure,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::hypothesis_violation: return "hypothesis-violation";
    case ErrorKind::numerical_failure: return "numerical-failure";
    case ErrorKind::io_failure: return "io-failure";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

class HypothesisViolation : public Error {
public:
    explicit HypothesisViolation(const std::string& what)
        : Error(ErrorKind::hypothesis_violation, what) {}
};

class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& what) : Error(ErrorKind::numerical_failure, what) {}
};

/// No Neumann mode admits a purely imaginary characteristic root.
class EmptyCrossingSet : public NumericalFailure {
public:
    explicit EmptyCrossingSet(const std::string& what) : NumericalFailure(what) {}
};

/// A center-manifold linear system is singular (2iω or 0 is a characteristic value).
class Resonance : public NumericalFailure {
public:
    explicit Resonance(const std::string& what) : NumericalFailure(what) {}
};

class IoFailure : public Error {
public:
    explicit IoFailure(const std::string& what) : Error(ErrorKind::io_failure, what) {}
};

} // namespace mussel
