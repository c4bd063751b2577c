#include <algorithm>
#include <string>
#include <vector>

#include "idforge/error.hpp"
#include "idforge/imaging.hpp"

namespace idforge {

namespace {

void check_kernel(Kernel k) {
    if (k.w < 1 || k.h < 1 || k.w % 2 == 0 || k.h % 2 == 0) {
        throw Error(ErrorKind::InvalidArgument,
                    "structuring element must be odd and >= 1, got " + std::to_string(k.w) + "x" + std::to_string(k.h));
    }
}

enum class Op { Dilate, Erode };

// One separable pass along a line of `n` samples at `stride` spacing.
// The window is clipped to the line, which gives the border rules:
// dilation sees nothing beyond the edge, erosion ignores it.
void pass_line(const std::uint8_t* in, std::uint8_t* out, int n, std::ptrdiff_t stride, int radius, Op op,
               std::vector<int>& prefix) {
    prefix.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + in[i * stride];
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - radius);
        const int hi = std::min(n - 1, i + radius);
        const int on = prefix[hi + 1] - prefix[lo];
        out[i * stride] = op == Op::Dilate ? (on > 0) : (on == hi - lo + 1);
    }
}

BinaryMask apply(const BinaryMask& mask, Kernel k, Op op) {
    check_kernel(k);
    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::uint8_t> tmp(mask.bits().begin(), mask.bits().end());
    std::vector<std::uint8_t> out(tmp.size());
    std::vector<int> prefix;

    for (int y = 0; y < h; ++y) {
        pass_line(tmp.data() + static_cast<std::ptrdiff_t>(y) * w, out.data() + static_cast<std::ptrdiff_t>(y) * w, w, 1,
                  k.w / 2, op, prefix);
    }
    for (int x = 0; x < w; ++x) {
        pass_line(out.data() + x, tmp.data() + x, h, w, k.h / 2, op, prefix);
    }

    BinaryMask result(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) result.set(x, y, tmp[static_cast<std::size_t>(y) * w + x] != 0);
    }
    return result;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, Kernel kernel) { return apply(mask, kernel, Op::Dilate); }

BinaryMask erode(const BinaryMask& mask, Kernel kernel) { return apply(mask, kernel, Op::Erode); }

BinaryMask morphological_close(const BinaryMask& mask, Kernel kernel) {
    return erode(dilate(mask, kernel), kernel);
}

Rect largest_inscribed_rect(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> heights(static_cast<std::size_t>(w), 0);
    std::vector<int> left(static_cast<std::size_t>(w));
    std::vector<int> right(static_cast<std::size_t>(w));
    std::vector<int> stack;
    stack.reserve(static_cast<std::size_t>(w));

    Rect best{};
    long long best_area = 0;
    auto better = [&](const Rect& r) {
        const long long a = r.area();
        if (a != best_area) return a > best_area;
        if (r.y != best.y) return r.y < best.y;
        if (r.x != best.x) return r.x < best.x;
        return r.w < best.w;
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) heights[x] = mask.at(x, y) ? heights[x] + 1 : 0;

        // left[x]: first column of the run ending at x where every height >= heights[x].
        stack.clear();
        for (int x = 0; x < w; ++x) {
            while (!stack.empty() && heights[stack.back()] >= heights[x]) stack.pop_back();
            left[x] = stack.empty() ? 0 : stack.back() + 1;
            stack.push_back(x);
        }
        stack.clear();
        for (int x = w - 1; x >= 0; --x) {
            while (!stack.empty() && heights[stack.back()] >= heights[x]) stack.pop_back();
            right[x] = stack.empty() ? w - 1 : stack.back() - 1;
            stack.push_back(x);
        }

        for (int x = 0; x < w; ++x) {
            if (heights[x] == 0) continue;
            const Rect r{left[x], y - heights[x] + 1, right[x] - left[x] + 1, heights[x]};
            if (better(r)) {
                best = r;
                best_area = r.area();
            }
        }
    }
    if (best_area == 0) {
        throw Error(ErrorKind::EmptyMask, "mask has no true pixel");
    }
    return best;
}

}  // namespace idforge
