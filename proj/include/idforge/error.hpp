#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace idforge {

// Every failure the toolkit reports is an Error carrying one of these kinds.
// The CLI maps kinds onto exit codes (usage vs data vs internal).
enum class ErrorKind {
    // imaging-core
    SingularHomography,
    EmptyMask,
    OutOfBounds,
    // texture-lab
    TagNotFound,
    MalformedPayload,
    ImageTooSmall,
    ColorMismatch,
    ResidualTooSmall,
    // template-forge
    EmptyAssetPool,
    MissingAsset,
    TextOverflow,
    DegenerateQuad,
    GeometryMismatch,
    // metrics
    TooFewSamples,
    NotPSD,
    DimensionMismatch,
    EmptySpecies,
    NoBonaFide,
    // dataset-manager
    ParseError,
    BadFractions,
    UnresolvedSelector,
    // shared
    InvalidArgument,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace idforge
