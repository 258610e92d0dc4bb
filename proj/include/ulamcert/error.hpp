#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ulamcert {

enum class ErrorCode {
    kInvalidArgument,
    kInvalidMap,
    kDomainGap,
    kNumericConsistency,
    kAlignment,
    kParse,
    kIo,
    kNoUnitEigenvalue,
    kResidual,
    kDivergence,
    kSpectralStructure,
    kMode,
    kDomain,
    kPrecondition,
    kIterationCap,
    kNonConvergence,
};

std::string_view to_string(ErrorCode code);

/// Every failure reported by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch on the kind of failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ulamcert
