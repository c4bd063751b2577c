#include <algorithm>
#include <cmath>

#include "idforge/error.hpp"
#include "idforge/imaging.hpp"

namespace idforge {

namespace {

// Sample positions this close to the border count as inside; absorbs
// rounding in H^-1 for points that map exactly onto the edge.
constexpr double kEdgeSlack = 1e-9;

}  // namespace

ImageBuffer warp_projective(const ImageBuffer& img, const Homography& h, Size2 out_size, Interpolation interp) {
    if (out_size.w <= 0 || out_size.h <= 0) {
        throw Error(ErrorKind::InvalidArgument, "warp output size must be positive");
    }
    const Homography inv = h.inverse();
    const auto& m = inv.matrix();

    ImageBuffer out(out_size.w, out_size.h, kBlack);
    const int sw = img.width();
    const int sh = img.height();
    const double max_x = sw - 1;
    const double max_y = sh - 1;

    for (int y = 0; y < out_size.h; ++y) {
        std::uint8_t* dst = out.row(y);
        for (int x = 0; x < out_size.w; ++x, dst += 3) {
            const double w = m[2][0] * x + m[2][1] * y + m[2][2];
            if (w == 0.0) continue;
            double sx = (m[0][0] * x + m[0][1] * y + m[0][2]) / w;
            double sy = (m[1][0] * x + m[1][1] * y + m[1][2]) / w;
            if (!(sx >= -kEdgeSlack && sy >= -kEdgeSlack && sx <= max_x + kEdgeSlack && sy <= max_y + kEdgeSlack)) {
                continue;
            }
            sx = std::clamp(sx, 0.0, max_x);
            sy = std::clamp(sy, 0.0, max_y);

            if (interp == Interpolation::Nearest) {
                const auto* src = img.row(static_cast<int>(std::lround(sy))) + 3 * std::lround(sx);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
                continue;
            }

            const int x0 = static_cast<int>(sx);
            const int y0 = static_cast<int>(sy);
            const int x1 = std::min(x0 + 1, sw - 1);
            const int y1 = std::min(y0 + 1, sh - 1);
            const double fx = sx - x0;
            const double fy = sy - y0;
            const auto* r0 = img.row(y0);
            const auto* r1 = img.row(y1);
            for (int c = 0; c < 3; ++c) {
                const double top = r0[3 * x0 + c] * (1.0 - fx) + r0[3 * x1 + c] * fx;
                const double bottom = r1[3 * x0 + c] * (1.0 - fx) + r1[3 * x1 + c] * fx;
                const double v = top * (1.0 - fy) + bottom * fy;
                dst[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

}  // namespace idforge
