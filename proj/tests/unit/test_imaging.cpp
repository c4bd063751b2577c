#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "idforge/error.hpp"
#include "idforge/imaging.hpp"
#include "support.hpp"

using namespace idforge;
using idforge::testing::random_image;
using idforge::testing::random_mask;

TEST_CASE("rgb_to_hsv reference points") {
    auto black = rgb_to_hsv({0, 0, 0});
    CHECK(black.h == 0.0);
    CHECK(black.s == 0.0);
    CHECK(black.v == 0.0);

    auto red = rgb_to_hsv({255, 0, 0});
    CHECK(red.h == 0.0);
    CHECK(red.s == 1.0);
    CHECK(red.v == 1.0);

    auto gray = rgb_to_hsv({128, 128, 128});
    CHECK(gray.h == 0.0);
    CHECK(gray.s == 0.0);
    CHECK(gray.v == doctest::Approx(128.0 / 255.0).epsilon(1e-12));

    auto magenta_ish = rgb_to_hsv({255, 0, 1});
    CHECK(magenta_ish.h < 360.0);
    CHECK(magenta_ish.h > 359.0);
}

TEST_CASE("hsv_to_rgb reference points") {
    CHECK(hsv_to_rgb({0, 0, 0}) == Rgb{0, 0, 0});
    CHECK(hsv_to_rgb({120, 1, 1}) == Rgb{0, 255, 0});
    CHECK(hsv_to_rgb({360, 1, 1}) == Rgb{255, 0, 0});
    CHECK(hsv_to_rgb({-120, 1, 1}) == Rgb{0, 0, 255});
}

TEST_CASE("rgb -> hsv -> rgb round trip within one step on random pixels") {
    Rng rng(7);
    int worst = 0;
    for (int i = 0; i < 100000; ++i) {
        const Rgb p{static_cast<std::uint8_t>(rng.uniform_int(0, 255)), static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                    static_cast<std::uint8_t>(rng.uniform_int(0, 255))};
        const Hsv hsv = rgb_to_hsv(p);
        REQUIRE(hsv.h >= 0.0);
        REQUIRE(hsv.h < 360.0);
        REQUIRE(hsv.s >= 0.0);
        REQUIRE(hsv.s <= 1.0);
        REQUIRE(hsv.v >= 0.0);
        REQUIRE(hsv.v <= 1.0);
        const Rgb q = hsv_to_rgb(hsv);
        worst = std::max({worst, std::abs(p.r - q.r), std::abs(p.g - q.g), std::abs(p.b - q.b)});
    }
    CHECK(worst <= 1);
}

TEST_CASE("hue_distance is circular") {
    CHECK(hue_distance(350, 10) == doctest::Approx(20));
    CHECK(hue_distance(10, 350) == doctest::Approx(20));
    CHECK(hue_distance(0, 180) == doctest::Approx(180));
    CHECK(hue_distance(90, 90) == 0.0);
}

TEST_CASE("homography construction and inversion") {
    CHECK_THROWS_AS(Homography(Homography::Matrix{{{1, 0, 0}, {2, 0, 0}, {0, 0, 1}}}), Error);
    const Homography scaled(Homography::Matrix{{{2, 0, 4}, {0, 2, 6}, {0, 0, 2}}});
    CHECK(scaled.matrix()[2][2] == 1.0);
    CHECK(scaled.matrix()[0][2] == 2.0);

    const std::array<Point2, 4> src{{{0, 0}, {99, 0}, {99, 59}, {0, 59}}};
    const std::array<Point2, 4> dst{{{3, 2}, {95, 5}, {97, 57}, {1, 55}}};
    const Homography h = Homography::from_quad(src, dst);
    for (int i = 0; i < 4; ++i) {
        const Point2 p = h.apply(src[i]);
        CHECK(p.x == doctest::Approx(dst[i].x).epsilon(1e-9));
        CHECK(p.y == doctest::Approx(dst[i].y).epsilon(1e-9));
    }
    const Homography round = h * h.inverse();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(round.matrix()[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
}

TEST_CASE("warp_projective identity is byte-exact") {
    Rng rng(1);
    const ImageBuffer img = random_image(rng, 37, 23);
    CHECK(warp_projective(img, Homography::identity(), {37, 23}) == img);
    CHECK(warp_projective(img, Homography::identity(), {37, 23}, Interpolation::Nearest) == img);
}

TEST_CASE("warp_projective translation shifts and fills black") {
    Rng rng(2);
    const ImageBuffer img = random_image(rng, 40, 20);
    const ImageBuffer out = warp_projective(img, Homography::translation(10, 0), {40, 20});
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 40; ++x) {
            if (x >= 10) {
                REQUIRE(out.at(x, y) == img.at(x - 10, y));
            } else {
                REQUIRE(out.at(x, y) == kBlack);
            }
        }
    }
}

TEST_CASE("warp_projective rejects singular homographies") {
    // Constructing the matrix already fails; a homography can never be singular.
    CHECK_THROWS_WITH_AS(Homography(Homography::Matrix{{{0, 0, 0}, {0, 0, 0}, {0, 0, 1}}}),
                         doctest::Contains("SingularHomography"), Error);
}

TEST_CASE("warp by H then H^-1 recovers interior pixels") {
    Rng rng(3);
    // Smooth image so bilinear resampling error stays small.
    ImageBuffer img(96, 72);
    for (int y = 0; y < 72; ++y)
        for (int x = 0; x < 96; ++x)
            img.set(x, y, {static_cast<std::uint8_t>(x * 2), static_cast<std::uint8_t>(y * 3),
                           static_cast<std::uint8_t>((x + y) % 200)});
    for (int trial = 0; trial < 20; ++trial) {
        const std::array<Point2, 4> src{{{0, 0}, {95, 0}, {95, 71}, {0, 71}}};
        std::array<Point2, 4> dst{};
        for (int i = 0; i < 4; ++i) dst[i] = {src[i].x + rng.uniform(-2, 2), src[i].y + rng.uniform(-2, 2)};
        const Homography h = Homography::from_quad(src, dst);
        const ImageBuffer there = warp_projective(img, h, {96, 72});
        const ImageBuffer back = warp_projective(there, h.inverse(), {96, 72});
        for (int y = 5 + 3; y < 72 - 5 - 3; ++y) {
            for (int x = 5 + 3; x < 96 - 5 - 3; ++x) {
                const Rgb a = img.at(x, y), b = back.at(x, y);
                REQUIRE(std::abs(a.r - b.r) <= 3);
                REQUIRE(std::abs(a.g - b.g) <= 3);
                REQUIRE(std::abs(a.b - b.b) <= 3);
            }
        }
    }
}

TEST_CASE("morphological_close basics") {
    BinaryMask full(16, 12, true);
    CHECK(morphological_close(full, {3, 3}) == full);
    CHECK(morphological_close(full) == full);

    BinaryMask holed(16, 12, true);
    holed.set(7, 5, false);
    CHECK(morphological_close(holed, {3, 3}) == full);

    CHECK_THROWS_AS(morphological_close(full, {4, 3}), Error);
    CHECK_THROWS_AS(morphological_close(full, {3, 0}), Error);
}

TEST_CASE("morphological_close is extensive and idempotent on random masks") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const BinaryMask m = random_mask(rng, 64, 64, rng.uniform(0.2, 0.9));
        const Kernel k{static_cast<int>(rng.uniform_int(0, 3)) * 2 + 1, static_cast<int>(rng.uniform_int(0, 3)) * 2 + 1};
        const BinaryMask once = morphological_close(m, k);
        REQUIRE(morphological_close(once, k) == once);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (m.at(x, y)) REQUIRE(once.at(x, y));
    }
}

TEST_CASE("dilate/erode match a direct window oracle") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const BinaryMask m = random_mask(rng, 19, 13, 0.5);
        const Kernel k{5, 3};
        const BinaryMask d = dilate(m, k);
        const BinaryMask e = erode(m, k);
        for (int y = 0; y < 13; ++y) {
            for (int x = 0; x < 19; ++x) {
                bool any = false, all = true;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -2; dx <= 2; ++dx) {
                        const int xx = x + dx, yy = y + dy;
                        if (xx < 0 || yy < 0 || xx >= 19 || yy >= 13) continue;
                        any |= m.at(xx, yy);
                        all &= m.at(xx, yy);
                    }
                REQUIRE(d.at(x, y) == any);
                REQUIRE(e.at(x, y) == all);
            }
        }
    }
}

namespace {

// Literal O(n^6): every rectangle, every pixel checked.
Rect brute_force_rect(const BinaryMask& m) {
    Rect best{};
    long long best_area = 0;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            for (int h = 1; y + h <= m.height(); ++h)
                for (int w = 1; x + w <= m.width(); ++w) {
                    bool full = true;
                    for (int yy = y; yy < y + h && full; ++yy)
                        for (int xx = x; xx < x + w && full; ++xx) full = m.at(xx, yy);
                    if (!full) continue;
                    const long long a = static_cast<long long>(w) * h;
                    // Iteration order is (y, x, h, w); only strict improvement or the
                    // narrower of two same-area rects at the same corner replaces.
                    if (a > best_area || (a == best_area && y == best.y && x == best.x && w < best.w)) {
                        best = {x, y, w, h};
                        best_area = a;
                    }
                }
    return best;
}

}  // namespace

TEST_CASE("largest_inscribed_rect reference masks") {
    CHECK(largest_inscribed_rect(BinaryMask(10, 10, true)) == Rect{0, 0, 10, 10});

    BinaryMask block(12, 10);
    for (int y = 4; y < 7; ++y)
        for (int x = 2; x < 7; ++x) block.set(x, y, true);
    CHECK(largest_inscribed_rect(block) == Rect{2, 4, 5, 3});

    CHECK_THROWS_AS(largest_inscribed_rect(BinaryMask(5, 5, false)), Error);

    // Two equal 2x2 squares: the upper one wins; same row, the left one.
    BinaryMask ties(8, 8);
    for (auto [x0, y0] : {std::pair{5, 1}, std::pair{1, 4}})
        for (int y = y0; y < y0 + 2; ++y)
            for (int x = x0; x < x0 + 2; ++x) ties.set(x, y, true);
    CHECK(largest_inscribed_rect(ties) == Rect{5, 1, 2, 2});
}

TEST_CASE("largest_inscribed_rect equals O(n^6) brute force on random masks") {
    Rng rng(21);
    for (int trial = 0; trial < 150; ++trial) {
        const int w = static_cast<int>(rng.uniform_int(1, 12));
        const int h = static_cast<int>(rng.uniform_int(1, 12));
        BinaryMask m = random_mask(rng, w, h, rng.uniform(0.3, 0.95));
        if (!m.any()) m.set(0, 0, true);
        const Rect fast = largest_inscribed_rect(m);
        const Rect slow = brute_force_rect(m);
        REQUIRE(fast.area() == slow.area());
        REQUIRE(fast == slow);
        for (int y = fast.y; y < fast.y + fast.h; ++y)
            for (int x = fast.x; x < fast.x + fast.w; ++x) REQUIRE(m.at(x, y));
    }
}

TEST_CASE("crop") {
    Rng rng(4);
    const ImageBuffer img = random_image(rng, 30, 20);
    CHECK(crop(img, {0, 0, 30, 20}) == img);
    const ImageBuffer px = crop(img, {0, 0, 1, 1});
    CHECK(px.width() == 1);
    CHECK(px.at(0, 0) == img.at(0, 0));
    CHECK_THROWS_AS(crop(img, {25, 0, 6, 1}), Error);
    CHECK_THROWS_AS(crop(img, {-1, 0, 2, 2}), Error);
    CHECK_THROWS_AS(crop(img, {0, 0, 0, 2}), Error);

    for (int trial = 0; trial < 50; ++trial) {
        const Rect outer{static_cast<int>(rng.uniform_int(0, 10)), static_cast<int>(rng.uniform_int(0, 8)),
                         static_cast<int>(rng.uniform_int(5, 20)), static_cast<int>(rng.uniform_int(5, 12))};
        const Rect inner{static_cast<int>(rng.uniform_int(0, 4)), static_cast<int>(rng.uniform_int(0, 4)),
                         static_cast<int>(rng.uniform_int(1, outer.w - 4)), static_cast<int>(rng.uniform_int(1, outer.h - 4))};
        const Rect composed{outer.x + inner.x, outer.y + inner.y, inner.w, inner.h};
        REQUIRE(crop(crop(img, outer), inner) == crop(img, composed));
    }
}

TEST_CASE("rotate90_cw four times is identity") {
    Rng rng(5);
    const ImageBuffer img = random_image(rng, 7, 4);
    const ImageBuffer r = rotate90_cw(img);
    CHECK(r.width() == 4);
    CHECK(r.at(3, 0) == img.at(0, 0));
    CHECK(rotate90_cw(rotate90_cw(rotate90_cw(r))) == img);
}

TEST_CASE("png round trip is lossless") {
    Rng rng(6);
    idforge::testing::TempDir dir("png");
    const ImageBuffer img = random_image(rng, 33, 17);
    write_png(dir.path() / "a.png", img);
    CHECK(read_png(dir.path() / "a.png") == img);
    CHECK_THROWS_AS(read_png(dir.path() / "missing.png"), Error);
}

TEST_CASE("image buffer invariants") {
    CHECK_THROWS_AS(ImageBuffer(0, 4), Error);
    CHECK_THROWS_AS(ImageBuffer(2, 2, std::vector<std::uint8_t>(11)), Error);
    ImageBuffer img(3, 2, Rgb{1, 2, 3});
    CHECK(img.data().size() == 18);
    CHECK(img.at(2, 1) == Rgb{1, 2, 3});
}
