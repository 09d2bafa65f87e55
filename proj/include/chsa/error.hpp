#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chsa {

enum class ErrorCode {
    NonPositiveCoordinate,
    NonPositiveAlpha,
    InvalidCloud,
    KTooLarge,
    DimensionMismatch,
    KktSingular,
    WrongDimension,
    OutOfCube,
    UnknownKind,
    InvalidSpec,
    Parse,
    Io,
};

inline std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonPositiveCoordinate: return "NonPositiveCoordinate";
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::InvalidCloud: return "InvalidCloud";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KktSingular: return "KktSingular";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::OutOfCube: return "OutOfCube";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Single exception type for the library; the code identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace chsa
