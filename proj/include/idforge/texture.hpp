#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idforge/image.hpp"
#include "idforge/imaging.hpp"
#include "idforge/manifest.hpp"

namespace idforge::texture {

// Capture source of a residual. Both print media evaluate as "print".
enum class Pais : std::uint8_t { PrintPlain = 0, PrintGlossy = 1, Screen = 2 };

// Attack species a residual is applied for.
enum class Species { Print, Screen };

std::string_view to_string(Pais p) noexcept;
std::string_view to_string(Species s) noexcept;
Pais parse_pais(std::string_view s);
Species parse_species(std::string_view s);
Species species_of(Pais p) noexcept;

// ------------------------------------------------------------------ palette

inline constexpr int kPaletteSize = 50;
inline constexpr int kColorsPerPage = 10;

struct PaletteColor {
    int index = 0;
    Rgb nominal;
};

// Hue steps of 36 degrees across each block of ten; the block picks one of
// five fixed (saturation, value) tiers.
PaletteColor palette_color(int index);

// "IDPAL:v1:<index>"
std::string tag_payload(int index);
// Throws MalformedPayload unless `payload` is a well-formed tag for [0, 49].
int parse_tag_payload(std::string_view payload);

// Geometry of one palette image: white QR panel on the left, a black
// separator, then the solid colour.
struct PaletteLayout {
    static constexpr int kWidth = 800;
    static constexpr int kHeight = 480;
    static constexpr int kQrPanelWidth = 240;
    static constexpr int kSeparatorWidth = 16;
    static constexpr int kModulePx = 8;
    static constexpr Rect color_region() { return {kQrPanelWidth + kSeparatorWidth, 0, kWidth - kQrPanelWidth - kSeparatorWidth, kHeight}; }
};

ImageBuffer render_palette_image(int index);
// Sheet `page` (0-based) holding colours [page*per_page, (page+1)*per_page).
ImageBuffer render_palette_page(int page, int colors_per_page = kColorsPerPage);

struct PaletteFiles {
    std::vector<std::filesystem::path> images;
    std::vector<std::filesystem::path> pages;
};

// palette_XX.png for every colour, pages/page_N.png sheets and palette.json.
PaletteFiles generate_palette(const std::filesystem::path& out_dir, int colors_per_page = kColorsPerPage);

// Reads the QR tag. Throws TagNotFound or MalformedPayload.
int decode_color_tag(const ImageBuffer& img);

// filename -> colour index, used when a capture's tag is unreadable.
using ColorMap = std::map<std::string, int>;
ColorMap read_color_map(const std::filesystem::path& path);

// Tag first, then the map entry for `file_name`; throws TagNotFound if neither.
int decode_color_tag(const ImageBuffer& img, std::string_view file_name, const ColorMap* fallback);

// ------------------------------------------------------------------ isolation

struct PaletteCapture {
    ImageBuffer image;
    std::optional<int> decoded_color_index;
};

struct TextureResidual {
    int width = 0;
    int height = 0;
    // width*height*3, RGB interleaved, each in [-255, 255].
    std::vector<std::int16_t> residuals;
    Pais pais = Pais::PrintPlain;
    int source_color_index = 0;
    std::map<std::string, std::string> capture_meta;

    std::int16_t at(int x, int y, int c) const noexcept {
        return residuals[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    static TextureResidual zeros(int width, int height, Pais pais = Pais::PrintPlain);

    friend bool operator==(const TextureResidual&, const TextureResidual&) = default;
};

inline constexpr int kPatchWidth = 200;
inline constexpr int kPatchHeight = 150;
inline constexpr double kSigmaBand = 4.0;

// HSV statistics of the central patch, then mean +- 4 sigma on every channel
// (hue by circular distance), then morphological closing.
BinaryMask segment_color_region(const ImageBuffer& img, Kernel kernel = {});

struct IsolateOptions {
    Pais pais = Pais::PrintPlain;
    std::map<std::string, std::string> capture_meta;
    Kernel kernel{};
};

// segment -> largest inscribed rect -> crop -> subtract nominal colour.
TextureResidual isolate_texture(const PaletteCapture& capture, const PaletteColor& nominal,
                                const IsolateOptions& options = {});

// clamp(residual + 128); display only.
ImageBuffer visualize_residual(const TextureResidual& t);

// ------------------------------------------------------------------ storage

// .texr: "TEXR", u8 version=1, u32 width, u32 height, u8 pais, u8 colour index,
// then width*height*3 int16 residuals, all little-endian. capture_meta goes to
// "<file>.json".
void write_residual(const std::filesystem::path& path, const TextureResidual& t);
TextureResidual read_residual(const std::filesystem::path& path);

struct ResidualHeader {
    int width = 0;
    int height = 0;
    Pais pais = Pais::PrintPlain;
    int source_color_index = 0;
};
ResidualHeader read_residual_header(const std::filesystem::path& path);

// ------------------------------------------------------------------ application

struct ApplyOptions {
    bool foreground_only = true;
    // Mirror-tile residuals smaller than the base instead of failing.
    bool tile = false;
};

// Crops the residual at a seeded random offset and adds it with saturation.
ImageBuffer apply_texture(const ImageBuffer& base, const TextureResidual& t, std::uint64_t seed,
                          const ApplyOptions& options = {});

struct BatchFailure {
    std::size_t item = 0;
    std::string message;
};

struct TextureBatchResult {
    data::Manifest manifest;
    std::vector<BatchFailure> failures;
};

struct TextureBatchOptions {
    std::filesystem::path bonafide_dir;
    std::filesystem::path residual_store;
    std::filesystem::path out_dir;
    Species species = Species::Print;
    std::size_t count = 0;
    std::uint64_t base_seed = 0;
    unsigned threads = 1;
    ApplyOptions apply{};
};

// Item i uses base (i mod #bases) and a residual drawn with seed base_seed + i,
// so outputs do not depend on scheduling.
TextureBatchResult batch_textures(const TextureBatchOptions& options);


}  // namespace idforge::texture
