#include "voxelfeat/errors.hpp"

namespace voxelfeat {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidDepth: return "invalid-depth";
        case ErrorCode::kInvalidTransform: return "invalid-transform";
        case ErrorCode::kShape: return "shape";
        case ErrorCode::kDegenerateInput: return "degenerate-input";
        case ErrorCode::kParameter: return "parameter";
        case ErrorCode::kNumeric: return "numeric";
        case ErrorCode::kEncoding: return "encoding";
        case ErrorCode::kAugmentation: return "augmentation";
        case ErrorCode::kMissingFile: return "missing-file";
        case ErrorCode::kVersion: return "version";
        case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
        case ErrorCode::kIntegrity: return "integrity";
        case ErrorCode::kFormat: return "format";
        case ErrorCode::kIo: return "io";
    }
    return "unknown";
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::kMissingFile: return 3;
        case ErrorCode::kVersion: return 4;
        case ErrorCode::kDimensionMismatch: return 5;
        case ErrorCode::kShape: return 6;
        case ErrorCode::kParameter: return 7;
        case ErrorCode::kIntegrity: return 8;
        case ErrorCode::kFormat: return 9;
        case ErrorCode::kIo: return 10;
        case ErrorCode::kInvalidDepth: return 11;
        case ErrorCode::kInvalidTransform: return 12;
        case ErrorCode::kDegenerateInput: return 13;
        case ErrorCode::kNumeric: return 14;
        case ErrorCode::kEncoding: return 15;
        case ErrorCode::kAugmentation: return 16;
    }
    return 1;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + " error: " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace voxelfeat
