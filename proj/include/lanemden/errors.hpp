#pragma once

#include <stdexcept>
#include <string>

namespace lanemden {

enum class ErrorKind {
    InvalidArgument,
    QuadratureNonConvergence,
    AmbiguousCompleteness,
    StepSizeUnderflow,
    StepBudgetExhausted,
    SimultaneousZero,
    BracketConfirmationFailed,
    BracketInvariantBroken,
    NoGlobalProxyFound,
    EnclosureTooWide,
    MonotonicityViolation,
    ProfileMismatch,
    Config,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::QuadratureNonConvergence: return "QuadratureNonConvergence";
        case ErrorKind::AmbiguousCompleteness: return "AmbiguousCompleteness";
        case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
        case ErrorKind::StepBudgetExhausted: return "StepBudgetExhausted";
        case ErrorKind::SimultaneousZero: return "SimultaneousZero";
        case ErrorKind::BracketConfirmationFailed: return "BracketConfirmationFailed";
        case ErrorKind::BracketInvariantBroken: return "BracketInvariantBroken";
        case ErrorKind::NoGlobalProxyFound: return "NoGlobalProxyFound";
        case ErrorKind::EnclosureTooWide: return "EnclosureTooWide";
        case ErrorKind::MonotonicityViolation: return "MonotonicityViolation";
        case ErrorKind::ProfileMismatch: return "ProfileMismatch";
        case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace lanemden
