#include <algorithm>
#include <cmath>

#include "idforge/imaging.hpp"

namespace idforge {

Hsv rgb_to_hsv(Rgb p) noexcept {
    const int r = p.r, g = p.g, b = p.b;
    const int hi = std::max({r, g, b});
    const int lo = std::min({r, g, b});
    const int delta = hi - lo;

    Hsv out;
    out.v = hi / 255.0;
    if (delta == 0) return out;  // gray: h = s = 0
    out.s = static_cast<double>(delta) / hi;

    double h;
    if (hi == r) {
        h = 60.0 * static_cast<double>(g - b) / delta;
    } else if (hi == g) {
        h = 60.0 * (static_cast<double>(b - r) / delta + 2.0);
    } else {
        h = 60.0 * (static_cast<double>(r - g) / delta + 4.0);
    }
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
    return out;
}

namespace {

std::uint8_t quantize(double unit) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(unit * 255.0), 0L, 255L));
}

}  // namespace

Rgb hsv_to_rgb(Hsv p) noexcept {
    double h = std::fmod(p.h, 360.0);
    if (h < 0.0) h += 360.0;
    const double s = std::clamp(p.s, 0.0, 1.0);
    const double v = std::clamp(p.v, 0.0, 1.0);

    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    const double m = v - c;

    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp)) {
        case 0: r = c, g = x; break;
        case 1: r = x, g = c; break;
        case 2: g = c, b = x; break;
        case 3: g = x, b = c; break;
        case 4: r = x, b = c; break;
        default: r = c, b = x; break;
    }
    return {quantize(r + m), quantize(g + m), quantize(b + m)};
}

double hue_distance(double a, double b) noexcept {
    double d = std::fmod(std::abs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

}  // namespace idforge
