#pragma once

#include <stdexcept>
#include <string>

namespace recompress {

enum class ErrorCode {
    UnsupportedFormat,
    CorruptStream,
    MissingTable,
    LengthMismatch,
    ShapeMismatch,
    InvalidK,
    QFOutOfRange,
    PositionOutOfRange,
    NotBlockAligned,
    SpecInvalid,
    IOFailure,
    DegenerateLabels,
    ManifestEmpty,
    InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/// Base for all typed failures thrown by this library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

#define RECOMPRESS_DEFINE_ERROR(NAME)                                        \
    class NAME : public Error {                                              \
    public:                                                                  \
        explicit NAME(const std::string& message)                            \
            : Error(ErrorCode::NAME, message) {}                             \
    }

RECOMPRESS_DEFINE_ERROR(UnsupportedFormat);
RECOMPRESS_DEFINE_ERROR(CorruptStream);
RECOMPRESS_DEFINE_ERROR(MissingTable);
RECOMPRESS_DEFINE_ERROR(LengthMismatch);
RECOMPRESS_DEFINE_ERROR(ShapeMismatch);
RECOMPRESS_DEFINE_ERROR(InvalidK);
RECOMPRESS_DEFINE_ERROR(QFOutOfRange);
RECOMPRESS_DEFINE_ERROR(PositionOutOfRange);
RECOMPRESS_DEFINE_ERROR(NotBlockAligned);
RECOMPRESS_DEFINE_ERROR(SpecInvalid);
RECOMPRESS_DEFINE_ERROR(IOFailure);
RECOMPRESS_DEFINE_ERROR(DegenerateLabels);
RECOMPRESS_DEFINE_ERROR(ManifestEmpty);
RECOMPRESS_DEFINE_ERROR(InvalidArgument);

#undef RECOMPRESS_DEFINE_ERROR

} // namespace recompress
