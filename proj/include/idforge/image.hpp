#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace idforge {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kBlack{0, 0, 0};

// Hexcone HSV. h in degrees [0, 360), s and v in [0, 1].
struct Hsv {
    double h = 0.0;
    double s = 0.0;
    double v = 0.0;
};

// Axis-aligned rectangle in pixel coordinates; (x, y) is the top-left pixel.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const noexcept { return static_cast<long long>(w) * h; }
    bool contains(int px, int py) const noexcept { return px >= x && px < x + w && py >= y && py < y + h; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

// 8-bit RGB raster, row-major, channels interleaved.
class ImageBuffer {
public:
    static constexpr int kChannels = 3;

    ImageBuffer() = default;
    ImageBuffer(int width, int height, Rgb fill = kBlack);
    ImageBuffer(int width, int height, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    std::span<std::uint8_t> data() noexcept { return data_; }
    std::span<const std::uint8_t> data() const noexcept { return data_; }

    std::uint8_t* row(int y) noexcept { return data_.data() + offset(0, y); }
    const std::uint8_t* row(int y) const noexcept { return data_.data() + offset(0, y); }

    Rgb at(int x, int y) const noexcept {
        const auto* p = data_.data() + offset(x, y);
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c) noexcept {
        auto* p = data_.data() + offset(x, y);
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    bool in_bounds(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool contains(const Rect& r) const noexcept {
        return r.w > 0 && r.h > 0 && r.x >= 0 && r.y >= 0 && r.x + r.w <= width_ && r.y + r.h <= height_;
    }

    void fill(Rgb c);

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

// One boolean per pixel, row-major.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false)
        : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool at(int x, int y) const noexcept { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) noexcept { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

    std::size_t count() const noexcept;
    bool any() const noexcept { return count() > 0; }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// 3x3 projective transform, row-major, mapping (x, y, 1) column vectors.
class Homography {
public:
    using Matrix = std::array<std::array<double, 3>, 3>;

    static constexpr double kSingularTolerance = 1e-9;

    Homography() : m_{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}} {}
    // Throws SingularHomography when |det| < 1e-9. Normalizes m[2][2] to 1.
    explicit Homography(const Matrix& m);

    static Homography identity() { return Homography(); }
    static Homography translation(double dx, double dy);
    // Maps src[i] onto dst[i] for the four correspondences.
    static Homography from_quad(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst);

    const Matrix& matrix() const noexcept { return m_; }
    double determinant() const noexcept;
    Homography inverse() const;
    Point2 apply(Point2 p) const noexcept;

    Homography operator*(const Homography& rhs) const;

private:
    Matrix m_;
};

}  // namespace idforge
