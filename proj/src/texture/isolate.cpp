#include <algorithm>
#include <cmath>
#include <numbers>

#include "idforge/error.hpp"
#include "idforge/texture.hpp"

namespace idforge::texture {

namespace {

struct ChannelStats {
    double mean = 0.0;
    double sigma = 0.0;
};

struct PatchStats {
    ChannelStats h, s, v;
};

// Hue statistics are circular: the mean is the direction of the summed unit
// vectors and sigma the RMS of circular distances to that mean.
PatchStats patch_stats(const std::vector<Hsv>& px) {
    const double n = static_cast<double>(px.size());
    double sin_sum = 0, cos_sum = 0, s_sum = 0, v_sum = 0;
    for (const Hsv& p : px) {
        const double rad = p.h * std::numbers::pi / 180.0;
        sin_sum += std::sin(rad);
        cos_sum += std::cos(rad);
        s_sum += p.s;
        v_sum += p.v;
    }
    PatchStats st;
    st.h.mean = std::atan2(sin_sum, cos_sum) * 180.0 / std::numbers::pi;
    if (st.h.mean < 0) st.h.mean += 360.0;
    st.s.mean = s_sum / n;
    st.v.mean = v_sum / n;

    double h_sq = 0, s_sq = 0, v_sq = 0;
    for (const Hsv& p : px) {
        const double dh = hue_distance(p.h, st.h.mean);
        h_sq += dh * dh;
        s_sq += (p.s - st.s.mean) * (p.s - st.s.mean);
        v_sq += (p.v - st.v.mean) * (p.v - st.v.mean);
    }
    st.h.sigma = std::sqrt(h_sq / n);
    st.s.sigma = std::sqrt(s_sq / n);
    st.v.sigma = std::sqrt(v_sq / n);
    return st;
}

// Slack for rounding in the means; a uniform patch must match itself.
constexpr double kHueSlack = 1e-6;
constexpr double kUnitSlack = 1e-9;

}  // namespace

BinaryMask segment_color_region(const ImageBuffer& img, Kernel kernel) {
    if (img.width() < kPatchWidth || img.height() < kPatchHeight) {
        throw Error(ErrorKind::ImageTooSmall, "capture is " + std::to_string(img.width()) + "x" +
                                                  std::to_string(img.height()) + ", need at least 200x150");
    }
    const int x0 = std::clamp(img.width() / 2 - kPatchWidth / 2, 0, img.width() - kPatchWidth);
    const int y0 = std::clamp(img.height() / 2 - kPatchHeight / 2, 0, img.height() - kPatchHeight);

    std::vector<Hsv> patch;
    patch.reserve(static_cast<std::size_t>(kPatchWidth) * kPatchHeight);
    for (int y = y0; y < y0 + kPatchHeight; ++y)
        for (int x = x0; x < x0 + kPatchWidth; ++x) patch.push_back(rgb_to_hsv(img.at(x, y)));
    const PatchStats st = patch_stats(patch);

    const double h_band = kSigmaBand * st.h.sigma + kHueSlack;
    const double s_band = kSigmaBand * st.s.sigma + kUnitSlack;
    const double v_band = kSigmaBand * st.v.sigma + kUnitSlack;

    BinaryMask mask(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const Hsv p = rgb_to_hsv(img.at(x, y));
            mask.set(x, y,
                     hue_distance(p.h, st.h.mean) <= h_band && std::abs(p.s - st.s.mean) <= s_band &&
                         std::abs(p.v - st.v.mean) <= v_band);
        }
    }
    return morphological_close(mask, kernel);
}

TextureResidual TextureResidual::zeros(int width, int height, Pais pais) {
    TextureResidual t;
    t.width = width;
    t.height = height;
    t.pais = pais;
    t.residuals.assign(static_cast<std::size_t>(width) * height * 3, 0);
    return t;
}

TextureResidual isolate_texture(const PaletteCapture& capture, const PaletteColor& nominal,
                                const IsolateOptions& options) {
    if (capture.decoded_color_index && *capture.decoded_color_index != nominal.index) {
        throw Error(ErrorKind::ColorMismatch, "capture tagged " + std::to_string(*capture.decoded_color_index) +
                                                  " but nominal colour is " + std::to_string(nominal.index));
    }
    const BinaryMask mask = segment_color_region(capture.image, options.kernel);
    const Rect rect = largest_inscribed_rect(mask);
    const ImageBuffer patch = crop(capture.image, rect);

    TextureResidual t = TextureResidual::zeros(patch.width(), patch.height(), options.pais);
    t.source_color_index = nominal.index;
    t.capture_meta = options.capture_meta;
    const std::array<int, 3> ref{nominal.nominal.r, nominal.nominal.g, nominal.nominal.b};
    const auto src = patch.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        t.residuals[i] = static_cast<std::int16_t>(static_cast<int>(src[i]) - ref[i % 3]);
    }
    return t;
}

ImageBuffer visualize_residual(const TextureResidual& t) {
    ImageBuffer out(t.width, t.height);
    auto dst = out.data();
    for (std::size_t i = 0; i < t.residuals.size(); ++i) {
        dst[i] = static_cast<std::uint8_t>(std::clamp(t.residuals[i] + 128, 0, 255));
    }
    return out;
}

}  // namespace idforge::texture
