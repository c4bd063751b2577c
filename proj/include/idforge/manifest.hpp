#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace idforge::data {

enum class ImageClass { Bonafide, Composite, Print, Screen };
enum class Origin { Captured, Templates, StyleGan2, CycleGan, Textures };
enum class Split { Train, Val, Test };

std::string_view to_string(ImageClass c) noexcept;
std::string_view to_string(Origin o) noexcept;
std::string_view to_string(Split s) noexcept;

// Exact lowercase names; throws ParseError otherwise.
ImageClass parse_class(std::string_view s);
Origin parse_origin(std::string_view s);
Split parse_split(std::string_view s);

struct ManifestRow {
    std::string path;
    ImageClass image_class = ImageClass::Bonafide;
    Origin origin = Origin::Captured;
    Split split = Split::Train;
    std::optional<std::uint64_t> seed;

    friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

using Manifest = std::vector<ManifestRow>;

// JSON Lines, one row object per line. Blank lines are skipped.
Manifest parse_manifest(std::istream& in);
Manifest read_manifest(const std::filesystem::path& path);
std::string to_jsonl(const ManifestRow& row);
void write_manifest_stream(std::ostream& out, const Manifest& rows);
// Written to a temporary sibling and renamed into place.
void write_manifest(const std::filesystem::path& path, const Manifest& rows);

// CSV with header path,class,origin,split[,seed].
Manifest import_csv(const std::filesystem::path& path);

// Writes `contents` to a temporary sibling and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

}  // namespace idforge::data
