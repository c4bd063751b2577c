#include "idforge/error.hpp"

namespace idforge {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::SingularHomography: return "SingularHomography";
        case ErrorKind::EmptyMask: return "EmptyMask";
        case ErrorKind::OutOfBounds: return "OutOfBounds";
        case ErrorKind::TagNotFound: return "TagNotFound";
        case ErrorKind::MalformedPayload: return "MalformedPayload";
        case ErrorKind::ImageTooSmall: return "ImageTooSmall";
        case ErrorKind::ColorMismatch: return "ColorMismatch";
        case ErrorKind::ResidualTooSmall: return "ResidualTooSmall";
        case ErrorKind::EmptyAssetPool: return "EmptyAssetPool";
        case ErrorKind::MissingAsset: return "MissingAsset";
        case ErrorKind::TextOverflow: return "TextOverflow";
        case ErrorKind::DegenerateQuad: return "DegenerateQuad";
        case ErrorKind::GeometryMismatch: return "GeometryMismatch";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::NotPSD: return "NotPSD";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptySpecies: return "EmptySpecies";
        case ErrorKind::NoBonaFide: return "NoBonaFide";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::BadFractions: return "BadFractions";
        case ErrorKind::UnresolvedSelector: return "UnresolvedSelector";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace idforge
