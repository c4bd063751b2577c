#include <charconv>
#include <fstream>

#include <json.hpp>

#include "idforge/error.hpp"
#include "idforge/manifest.hpp"
#include "idforge/qr.hpp"
#include "idforge/texture.hpp"

namespace idforge::texture {

namespace {

struct Tier {
    double s;
    double v;
};

constexpr std::array<Tier, 5> kTiers{{{1.0, 1.0}, {1.0, 0.6}, {0.6, 1.0}, {0.4, 0.8}, {0.2, 0.95}}};

constexpr std::string_view kTagPrefix = "IDPAL:v1:";

void check_index(int index) {
    if (index < 0 || index >= kPaletteSize) {
        throw Error(ErrorKind::InvalidArgument, "palette index " + std::to_string(index) + " outside [0, 49]");
    }
}

}  // namespace

std::string_view to_string(Pais p) noexcept {
    switch (p) {
        case Pais::PrintPlain: return "print_plain";
        case Pais::PrintGlossy: return "print_glossy";
        case Pais::Screen: return "screen";
    }
    return "?";
}

std::string_view to_string(Species s) noexcept { return s == Species::Print ? "print" : "screen"; }

Pais parse_pais(std::string_view s) {
    for (Pais p : {Pais::PrintPlain, Pais::PrintGlossy, Pais::Screen})
        if (to_string(p) == s) return p;
    throw Error(ErrorKind::InvalidArgument, "unknown PAIS '" + std::string(s) + "'");
}

Species parse_species(std::string_view s) {
    if (s == "print") return Species::Print;
    if (s == "screen") return Species::Screen;
    throw Error(ErrorKind::InvalidArgument, "unknown species '" + std::string(s) + "' (print|screen)");
}

Species species_of(Pais p) noexcept { return p == Pais::Screen ? Species::Screen : Species::Print; }

PaletteColor palette_color(int index) {
    check_index(index);
    const Tier tier = kTiers[index / 10];
    return {index, hsv_to_rgb({(index % 10) * 36.0, tier.s, tier.v})};
}

std::string tag_payload(int index) {
    check_index(index);
    return std::string(kTagPrefix) + std::to_string(index);
}

int parse_tag_payload(std::string_view payload) {
    if (!payload.starts_with(kTagPrefix)) {
        throw Error(ErrorKind::MalformedPayload, "unexpected tag payload '" + std::string(payload) + "'");
    }
    const auto digits = payload.substr(kTagPrefix.size());
    int index = -1;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size() || index < 0 ||
        index >= kPaletteSize || (digits.size() > 1 && digits.front() == '0')) {
        throw Error(ErrorKind::MalformedPayload, "bad colour index in tag '" + std::string(payload) + "'");
    }
    return index;
}

ImageBuffer render_palette_image(int index) {
    using L = PaletteLayout;
    const PaletteColor color = palette_color(index);
    ImageBuffer img(L::kWidth, L::kHeight, Rgb{255, 255, 255});

    const ImageBuffer qr = qr::render(qr::encode(tag_payload(index), qr::Ecc::M), L::kModulePx);
    const int qx = (L::kQrPanelWidth - qr.width()) / 2;
    const int qy = (L::kHeight - qr.height()) / 2;
    for (int y = 0; y < qr.height(); ++y)
        for (int x = 0; x < qr.width(); ++x) img.set(qx + x, qy + y, qr.at(x, y));

    for (int y = 0; y < L::kHeight; ++y)
        for (int x = L::kQrPanelWidth; x < L::kQrPanelWidth + L::kSeparatorWidth; ++x) img.set(x, y, kBlack);

    const Rect region = L::color_region();
    for (int y = region.y; y < region.y + region.h; ++y)
        for (int x = region.x; x < region.x + region.w; ++x) img.set(x, y, color.nominal);
    return img;
}

ImageBuffer render_palette_page(int page, int colors_per_page) {
    if (colors_per_page < 1) throw Error(ErrorKind::InvalidArgument, "colors per page must be positive");
    const int pages = (kPaletteSize + colors_per_page - 1) / colors_per_page;
    if (page < 0 || page >= pages) throw Error(ErrorKind::InvalidArgument, "page out of range");

    // Two columns of swatches at native resolution so the tags stay crisp.
    constexpr int kGap = 40;
    const int rows = (colors_per_page + 1) / 2;
    const int width = 2 * PaletteLayout::kWidth + 3 * kGap;
    const int height = rows * PaletteLayout::kHeight + (rows + 1) * kGap;
    ImageBuffer sheet(width, height, Rgb{255, 255, 255});
    for (int slot = 0; slot < colors_per_page; ++slot) {
        const int index = page * colors_per_page + slot;
        if (index >= kPaletteSize) break;
        const ImageBuffer swatch = render_palette_image(index);
        const int ox = kGap + (slot % 2) * (PaletteLayout::kWidth + kGap);
        const int oy = kGap + (slot / 2) * (PaletteLayout::kHeight + kGap);
        for (int y = 0; y < swatch.height(); ++y)
            for (int x = 0; x < swatch.width(); ++x) sheet.set(ox + x, oy + y, swatch.at(x, y));
    }
    return sheet;
}

PaletteFiles generate_palette(const std::filesystem::path& out_dir, int colors_per_page) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "pages", ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

    PaletteFiles files;
    nlohmann::json listing = nlohmann::json::array();
    for (int i = 0; i < kPaletteSize; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "palette_%02d.png", i);
        const auto path = out_dir / name;
        write_png(path, render_palette_image(i));
        files.images.push_back(path);
        const Rgb c = palette_color(i).nominal;
        listing.push_back({{"index", i}, {"file", name}, {"rgb", {c.r, c.g, c.b}}, {"tag", tag_payload(i)}});
    }
    const int pages = (kPaletteSize + colors_per_page - 1) / colors_per_page;
    for (int p = 0; p < pages; ++p) {
        const auto path = out_dir / "pages" / ("page_" + std::to_string(p + 1) + ".png");
        write_png(path, render_palette_page(p, colors_per_page));
        files.pages.push_back(path);
    }
    data::atomic_write(out_dir / "palette.json", listing.dump(2) + "\n");
    return files;
}

int decode_color_tag(const ImageBuffer& img) {
    const auto payload = qr::decode(img);
    if (!payload) throw Error(ErrorKind::TagNotFound, "no readable colour tag");
    return parse_tag_payload(*payload);
}

ColorMap read_color_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open colour map " + path.string());
    ColorMap map;
    try {
        const auto j = nlohmann::json::parse(in);
        for (const auto& [name, value] : j.items()) {
            const int index = value.get<int>();
            check_index(index);
            map[name] = index;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, "colour map " + path.string() + ": " + e.what());
    }
    return map;
}

int decode_color_tag(const ImageBuffer& img, std::string_view file_name, const ColorMap* fallback) {
    try {
        return decode_color_tag(img);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::TagNotFound || fallback == nullptr) throw;
        if (auto it = fallback->find(std::string(file_name)); it != fallback->end()) return it->second;
        throw;
    }
}

}  // namespace idforge::texture
