#include "recompress/errors.hpp"

namespace recompress {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptStream: return "CorruptStream";
    case ErrorCode::MissingTable: return "MissingTable";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::QFOutOfRange: return "QFOutOfRange";
    case ErrorCode::PositionOutOfRange: return "PositionOutOfRange";
    case ErrorCode::NotBlockAligned: return "NotBlockAligned";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::IOFailure: return "IOFailure";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::ManifestEmpty: return "ManifestEmpty";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

} // namespace recompress
