#include "idforge/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "idforge/error.hpp"

namespace idforge {

ImageBuffer::ImageBuffer(int width, int height, Rgb fill_color) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw Error(ErrorKind::InvalidArgument,
                    "image dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
    }
    data_.resize(pixel_count() * kChannels);
    fill(fill_color);
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0) {
        throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
    }
    if (data_.size() != pixel_count() * kChannels) {
        throw Error(ErrorKind::InvalidArgument, "image data length " + std::to_string(data_.size()) +
                                                    " does not match " + std::to_string(width) + "x" +
                                                    std::to_string(height) + "x3");
    }
}

void ImageBuffer::fill(Rgb c) {
    for (std::size_t i = 0; i < data_.size(); i += kChannels) {
        data_[i] = c.r;
        data_[i + 1] = c.g;
        data_[i + 2] = c.b;
    }
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

double det3(const Homography::Matrix& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace

Homography::Homography(const Matrix& m) : m_(m) {
    if (!std::isfinite(det3(m_)) || std::abs(det3(m_)) < kSingularTolerance) {
        throw Error(ErrorKind::SingularHomography, "homography determinant is (near) zero");
    }
    const double s = m_[2][2];
    if (std::abs(s) > 1e-12) {
        for (auto& row : m_) {
            for (auto& v : row) v /= s;
        }
    }
    if (std::abs(det3(m_)) < kSingularTolerance) {
        throw Error(ErrorKind::SingularHomography, "homography determinant is (near) zero");
    }
}

Homography Homography::translation(double dx, double dy) { return Homography(Matrix{{{1, 0, dx}, {0, 1, dy}, {0, 0, 1}}}); }

Homography Homography::from_quad(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst) {
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> b;
    for (int i = 0; i < 4; ++i) {
        const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
        a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
        a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
        b(2 * i) = u;
        b(2 * i + 1) = v;
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
    if (!lu.isInvertible()) {
        throw Error(ErrorKind::SingularHomography, "quad correspondence is degenerate");
    }
    const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
    return Homography(Matrix{{{h(0), h(1), h(2)}, {h(3), h(4), h(5)}, {h(6), h(7), 1.0}}});
}

double Homography::determinant() const noexcept { return det3(m_); }

Homography Homography::inverse() const {
    const auto& m = m_;
    const double d = det3(m);
    if (std::abs(d) < kSingularTolerance) {
        throw Error(ErrorKind::SingularHomography, "homography is not invertible");
    }
    Matrix inv{};
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
    return Homography(inv);
}

Point2 Homography::apply(Point2 p) const noexcept {
    const auto& m = m_;
    const double w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    return {(m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w, (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w};
}

Homography Homography::operator*(const Homography& rhs) const {
    Matrix out{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += m_[i][k] * rhs.m_[k][j];
            out[i][j] = acc;
        }
    }
    return Homography(out);
}

}  // namespace idforge
