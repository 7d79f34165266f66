#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coaforge {

/// Raised when a caller breaks an operation's precondition (out-of-bounds
/// coordinate, non-adjacent move, negative combat power, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A document failed schema or invariant validation. Carries every issue
/// found, not just the first.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> issues);

    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    std::vector<std::string> issues_;
};

/// Structured-text parse failure with the offending line (1-based, 0 when
/// the failure is not tied to a line).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line = 0);

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A planning stage could not produce its product.
class PlanningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace coaforge
