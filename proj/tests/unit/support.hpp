#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "idforge/image.hpp"
#include "idforge/rng.hpp"

namespace idforge::testing {

// Temporary directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("idforge_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline ImageBuffer random_image(Rng& rng, int w, int h) {
    ImageBuffer img(w, h);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return img;
}

// Blobby random mask: a few random rectangles plus salt noise.
inline BinaryMask random_mask(Rng& rng, int w, int h, double density = 0.6) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, rng.bernoulli(density));
    const int blocks = static_cast<int>(rng.uniform_int(0, 3));
    for (int b = 0; b < blocks; ++b) {
        const int x0 = static_cast<int>(rng.uniform_int(0, w - 1));
        const int y0 = static_cast<int>(rng.uniform_int(0, h - 1));
        const int bw = static_cast<int>(rng.uniform_int(1, w - x0));
        const int bh = static_cast<int>(rng.uniform_int(1, h - y0));
        for (int y = y0; y < y0 + bh; ++y)
            for (int x = x0; x < x0 + bw; ++x) m.set(x, y, true);
    }
    return m;
}

}  // namespace idforge::testing
