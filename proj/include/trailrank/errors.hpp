#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trailrank {

enum class Errc {
    InvalidArgument,
    InvalidGeometry,
    DegenerateRoute,
    OutOfExtent,
    NoDataCell,
    InsufficientProfile,
    ZeroLength,
    OutOfRange,
    ParseError,
    IoError,
    TransportError,
    MalformedResponse,
    DimensionMismatch,
    ZeroVector,
    EmptyInput,
    MissingAttributes,
    InfeasibleSpec,
};

std::string_view errc_name(Errc code) noexcept;

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

inline std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::InvalidGeometry: return "InvalidGeometry";
        case Errc::DegenerateRoute: return "DegenerateRoute";
        case Errc::OutOfExtent: return "OutOfExtent";
        case Errc::NoDataCell: return "NoDataCell";
        case Errc::InsufficientProfile: return "InsufficientProfile";
        case Errc::ZeroLength: return "ZeroLength";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::ParseError: return "ParseError";
        case Errc::IoError: return "IoError";
        case Errc::TransportError: return "TransportError";
        case Errc::MalformedResponse: return "MalformedResponse";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::ZeroVector: return "ZeroVector";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::MissingAttributes: return "MissingAttributes";
        case Errc::InfeasibleSpec: return "InfeasibleSpec";
    }
    return "Unknown";
}

}  // namespace trailrank
