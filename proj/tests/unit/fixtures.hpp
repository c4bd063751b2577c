#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "idforge/rng.hpp"
#include "idforge/texture.hpp"

namespace idforge::testing {

// A palette image with known integer noise injected into its colour region,
// framed by a contrasting border, as a stand-in for a phone capture.
struct SyntheticCapture {
    ImageBuffer image;
    Rect color_region;             // in capture coordinates
    std::vector<int> noise;        // effective noise, color_region-sized, RGB interleaved
    int noise_at(int x, int y, int c) const { return noise[(static_cast<std::size_t>(y) * color_region.w + x) * 3 + c]; }
};

// Noise is drawn uniformly in [-amplitude, amplitude] and then limited so the
// sample stays in [0, 255]; `noise` holds what was actually added.
inline SyntheticCapture make_capture(int index, Rng& rng, int amplitude, int border = 40, Rgb border_color = kBlack) {
    const ImageBuffer clean = texture::render_palette_image(index);
    const Rgb nominal = texture::palette_color(index).nominal;
    const Rect region = texture::PaletteLayout::color_region();

    SyntheticCapture cap;
    cap.image = ImageBuffer(clean.width() + 2 * border, clean.height() + 2 * border, border_color);
    cap.color_region = {region.x + border, region.y + border, region.w, region.h};
    cap.noise.assign(static_cast<std::size_t>(region.w) * region.h * 3, 0);

    for (int y = 0; y < clean.height(); ++y)
        for (int x = 0; x < clean.width(); ++x) cap.image.set(x + border, y + border, clean.at(x, y));

    const std::array<int, 3> ref{nominal.r, nominal.g, nominal.b};
    for (int y = 0; y < region.h; ++y) {
        for (int x = 0; x < region.w; ++x) {
            std::array<int, 3> px{};
            for (int c = 0; c < 3; ++c) {
                const int drawn = static_cast<int>(rng.uniform_int(-amplitude, amplitude));
                px[c] = std::clamp(ref[c] + drawn, 0, 255);
                cap.noise[(static_cast<std::size_t>(y) * region.w + x) * 3 + c] = px[c] - ref[c];
            }
            cap.image.set(cap.color_region.x + x, cap.color_region.y + y,
                          {static_cast<std::uint8_t>(px[0]), static_cast<std::uint8_t>(px[1]),
                           static_cast<std::uint8_t>(px[2])});
        }
    }
    return cap;
}

inline double normal(Rng& rng) {
    // Box-Muller
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace idforge::testing
