#ifndef VSAD_ERROR_HPP
#define VSAD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vsad {

enum class ErrorCode {
    MismatchedRows,
    NonFinite,
    DegenerateRow,
    InconsistentDim,
    BadMagic,
    UnsupportedVersion,
    TruncatedFile,
    IoError,
    ParseError,
    InvariantViolation,
    ScaleTooLarge,
    EmptyScales,
    InvalidModel,
    EmptyPopulation,
    DimMismatch,
    InactiveSelected,
    EmptyImage,
    TooFewPoints,
    MissingLabels,
    KTooLarge,
    SingleClass,
    EmptyFeatures,
    InvalidConfig,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace vsad

#endif
