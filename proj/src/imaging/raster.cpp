#include <algorithm>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "idforge/error.hpp"
#include "idforge/imaging.hpp"

namespace idforge {

ImageBuffer crop(const ImageBuffer& img, const Rect& r) {
    if (!img.contains(r)) {
        throw Error(ErrorKind::OutOfBounds, "crop rect (" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                                                std::to_string(r.w) + "," + std::to_string(r.h) + ") outside " +
                                                std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
    ImageBuffer out(r.w, r.h);
    for (int y = 0; y < r.h; ++y) {
        std::memcpy(out.row(y), img.row(r.y + y) + 3 * r.x, static_cast<std::size_t>(r.w) * 3);
    }
    return out;
}

ImageBuffer resize(const ImageBuffer& img, Size2 size) {
    if (size.w <= 0 || size.h <= 0) {
        throw Error(ErrorKind::InvalidArgument, "resize target must be positive");
    }
    if (size.w == img.width() && size.h == img.height()) return img;
    const cv::Mat src(img.height(), img.width(), CV_8UC3, const_cast<std::uint8_t*>(img.data().data()));
    ImageBuffer out(size.w, size.h);
    cv::Mat dst(size.h, size.w, CV_8UC3, out.data().data());
    const bool shrinking = size.w < img.width() && size.h < img.height();
    cv::resize(src, dst, dst.size(), 0, 0, shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
    return out;
}

ImageBuffer rotate90_cw(const ImageBuffer& img) {
    ImageBuffer out(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) out.set(img.height() - 1 - y, x, img.at(x, y));
    }
    return out;
}

ImageBuffer read_png(const std::filesystem::path& path) {
    cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (raw.empty()) {
        throw Error(ErrorKind::IoError, "cannot read image " + path.string());
    }
    if (raw.depth() == CV_16U) {
        cv::Mat reduced;
        raw.convertTo(reduced, CV_8U, 1.0 / 257.0);
        raw = reduced;
    } else if (raw.depth() != CV_8U) {
        throw Error(ErrorKind::IoError, "unsupported sample depth in " + path.string());
    }

    cv::Mat rgb;
    switch (raw.channels()) {
        case 1: cv::cvtColor(raw, rgb, cv::COLOR_GRAY2RGB); break;
        case 3: cv::cvtColor(raw, rgb, cv::COLOR_BGR2RGB); break;
        case 4: {
            rgb.create(raw.rows, raw.cols, CV_8UC3);
            for (int y = 0; y < raw.rows; ++y) {
                const auto* s = raw.ptr<std::uint8_t>(y);
                auto* d = rgb.ptr<std::uint8_t>(y);
                for (int x = 0; x < raw.cols; ++x, s += 4, d += 3) {
                    const int a = s[3];
                    // BGRA over black, rounded.
                    d[0] = static_cast<std::uint8_t>((s[2] * a + 127) / 255);
                    d[1] = static_cast<std::uint8_t>((s[1] * a + 127) / 255);
                    d[2] = static_cast<std::uint8_t>((s[0] * a + 127) / 255);
                }
            }
            break;
        }
        default: throw Error(ErrorKind::IoError, "unsupported channel count in " + path.string());
    }

    std::vector<std::uint8_t> data(static_cast<std::size_t>(rgb.rows) * rgb.cols * 3);
    for (int y = 0; y < rgb.rows; ++y) {
        std::memcpy(data.data() + static_cast<std::size_t>(y) * rgb.cols * 3, rgb.ptr<std::uint8_t>(y),
                    static_cast<std::size_t>(rgb.cols) * 3);
    }
    return ImageBuffer(rgb.cols, rgb.rows, std::move(data));
}

void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
    const cv::Mat src(img.height(), img.width(), CV_8UC3, const_cast<std::uint8_t*>(img.data().data()));
    cv::Mat bgr;
    cv::cvtColor(src, bgr, cv::COLOR_RGB2BGR);
    const std::vector<int> params{cv::IMWRITE_PNG_COMPRESSION, 3};
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), bgr, params);
    } catch (const cv::Exception& e) {
        throw Error(ErrorKind::IoError, "cannot write " + path.string() + ": " + e.what());
    }
    if (!ok) {
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    }
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorKind::IoError, dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

namespace {

constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;

double font_scale(int font_px) { return cv::getFontScaleFromHeight(kFont, std::max(1, font_px), 1); }

}  // namespace

int text_width(std::string_view text, int font_px) {
    int baseline = 0;
    return cv::getTextSize(std::string(text), kFont, font_scale(font_px), 1, &baseline).width;
}

void draw_text(ImageBuffer& img, std::string_view text, int x, int baseline, int font_px, Rgb color) {
    cv::Mat view(img.height(), img.width(), CV_8UC3, img.data().data());
    cv::putText(view, std::string(text), {x, baseline}, kFont, font_scale(font_px), cv::Scalar(color.r, color.g, color.b),
                1, cv::LINE_AA);
}

}  // namespace idforge
