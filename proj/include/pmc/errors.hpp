#pragma once

#include <stdexcept>
#include <string>

namespace pmc {

enum class ErrorCode {
    StencilOutOfDomain,
    NonpositiveWarp,
    CollarTooThin,
    UnsupportedMetricKind,
    NoBoundary,
    NotRadial,
    DivergedField,
    NewtonStall,
    SingularJacobian,
    InsufficientHistory,
    NotSolutions,
    CollarEmpty,
    BallOutsideDomain,
    ZeroBeta,
    HypothesisFailed,
    NotASolution,
    InvalidArgument,
    ConfigError,
};

const char* to_string(ErrorCode c);

class PmcError : public std::runtime_error {
public:
    PmcError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pmc
