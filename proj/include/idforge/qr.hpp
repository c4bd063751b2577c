#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idforge/image.hpp"

namespace idforge::qr {

// Minimal QR Code support: byte mode, versions 1 and 2, single RS block.
// Enough for short palette tags; not a general-purpose QR library.

enum class Ecc { L, M, Q, H };

class Code {
public:
    Code(int version, Ecc ecc, int mask, std::vector<std::uint8_t> modules);

    int version() const noexcept { return version_; }
    int size() const noexcept { return 17 + 4 * version_; }
    Ecc ecc() const noexcept { return ecc_; }
    int mask() const noexcept { return mask_; }
    bool dark(int col, int row) const noexcept { return modules_[static_cast<std::size_t>(row) * size() + col] != 0; }

private:
    int version_;
    Ecc ecc_;
    int mask_;
    std::vector<std::uint8_t> modules_;
};

// Picks the smallest supported version that fits; throws InvalidArgument when
// the payload is too long.
Code encode(std::string_view payload, Ecc ecc = Ecc::M);

// Black modules on white, `quiet_zone` modules of margin, `module_px` pixels per module.
ImageBuffer render(const Code& code, int module_px, int quiet_zone = 4);

// Locates the three finder patterns (any rotation), samples the grid,
// corrects errors and returns the byte payload. nullopt when no readable code.
std::optional<std::string> decode(const ImageBuffer& img);

}  // namespace idforge::qr
