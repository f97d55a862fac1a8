#include "arcvol/errors.hpp"

#include <algorithm>

namespace arcvol {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
        case ErrorCode::DegenerateSlowFactor: return "DegenerateSlowFactor";
        case ErrorCode::ModificationDegenerate: return "ModificationDegenerate";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::SingularTime: return "SingularTime";
        case ErrorCode::LogDomain: return "LogDomain";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::CenteringFailure: return "CenteringFailure";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyChain: return "EmptyChain";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::NoInteriorMinimum: return "NoInteriorMinimum";
        case ErrorCode::NonConvergence: return "NonConvergence";
    }
    return "Unknown";
}

namespace {

std::string join_issues(const std::vector<Issue>& issues) {
    std::string out;
    for (const auto& issue : issues) {
        if (!out.empty()) out += "; ";
        out += std::string(to_string(issue.code)) + " (" + issue.field + "): " + issue.message;
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(issues.empty() ? ErrorCode::InvalidParameter : issues.front().code,
            join_issues(issues)),
      issues_(std::move(issues)) {}

bool ValidationError::has(ErrorCode code) const noexcept {
    return std::any_of(issues_.begin(), issues_.end(),
                       [code](const Issue& i) { return i.code == code; });
}

}  // namespace arcvol
