#pragma once

#include <filesystem>
#include <string_view>

#include "idforge/image.hpp"

namespace idforge {

Hsv rgb_to_hsv(Rgb p) noexcept;
Rgb hsv_to_rgb(Hsv p) noexcept;

// Circular distance between two hues in degrees, in [0, 180].
double hue_distance(double a, double b) noexcept;

enum class Interpolation { Bilinear, Nearest };

struct Size2 {
    int w = 0;
    int h = 0;
};

// Inverse-mapped warp. Output pixel (x, y) samples the source at H^-1 (x, y);
// locations outside the source image become exact black.
ImageBuffer warp_projective(const ImageBuffer& img, const Homography& h, Size2 out_size,
                            Interpolation interp = Interpolation::Bilinear);

struct Kernel {
    int w = 5;
    int h = 5;
};

// Rectangular structuring element. Dilation treats pixels beyond the border
// as false, erosion as true, so closing is extensive and idempotent.
BinaryMask dilate(const BinaryMask& mask, Kernel kernel);
BinaryMask erode(const BinaryMask& mask, Kernel kernel);
BinaryMask morphological_close(const BinaryMask& mask, Kernel kernel = {});

// Maximum-area all-true axis-aligned rectangle. Ties: smallest y, then x, then w.
Rect largest_inscribed_rect(const BinaryMask& mask);

ImageBuffer crop(const ImageBuffer& img, const Rect& r);

// Area averaging when shrinking, bilinear when enlarging.
ImageBuffer resize(const ImageBuffer& img, Size2 size);

ImageBuffer rotate90_cw(const ImageBuffer& img);

// PNG, 8-bit RGB. Gray is expanded, 16-bit is reduced, alpha is composited over black.
ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& img);
// Regular *.png files in `dir`, sorted by path.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// Anti-aliased Hershey sans-serif text; `font_px` is the cap height. ASCII only.
int text_width(std::string_view text, int font_px);
// `x` is the left edge, `baseline` the text baseline.
void draw_text(ImageBuffer& img, std::string_view text, int x, int baseline, int font_px, Rgb color);

}  // namespace idforge
