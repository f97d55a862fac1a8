#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace arcvol {

enum class ErrorCode {
    InvalidParameter,
    NonPositiveDefinite,
    DegenerateSlowFactor,
    ModificationDegenerate,
    DomainError,
    SingularTime,
    LogDomain,
    QuadratureFailure,
    CenteringFailure,
    ConfigError,
    ParseError,
    EmptyChain,
    InsufficientData,
    NoInteriorMinimum,
    NonConvergence,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// One violated invariant, named by the offending field.
struct Issue {
    ErrorCode code;
    std::string field;
    std::string message;
};

/// Thrown when validation finds one or more problems; carries all of them.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Issue> issues);

    const std::vector<Issue>& issues() const noexcept { return issues_; }
    bool has(ErrorCode code) const noexcept;

private:
    std::vector<Issue> issues_;
};

}  // namespace arcvol
