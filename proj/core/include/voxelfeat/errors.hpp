#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voxelfeat {

/// Error classes raised by the library. Each class maps to a distinct
/// process exit code in the command line tool.
enum class ErrorCode {
    kInvalidDepth,
    kInvalidTransform,
    kShape,
    kDegenerateInput,
    kParameter,
    kNumeric,
    kEncoding,
    kAugmentation,
    kMissingFile,
    kVersion,
    kDimensionMismatch,
    kIntegrity,
    kFormat,
    kIo,
};

std::string_view to_string(ErrorCode code);

/// Exit code used by the CLI for an error class. 0 is success, 1 is an
/// unexpected failure and 2 a usage error, so these start at 3.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace voxelfeat
