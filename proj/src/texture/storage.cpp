#include <array>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "idforge/error.hpp"
#include "idforge/manifest.hpp"
#include "idforge/texture.hpp"

namespace idforge::texture {

namespace {

constexpr std::array<char, 4> kMagic{'T', 'E', 'X', 'R'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 1 + 4 + 4 + 1 + 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    auto p = path;
    p += ".json";
    return p;
}

ResidualHeader parse_header(const unsigned char* h, const std::filesystem::path& path) {
    if (std::memcmp(h, kMagic.data(), 4) != 0) throw Error(ErrorKind::ParseError, path.string() + ": not a .texr file");
    if (h[4] != kVersion) {
        throw Error(ErrorKind::ParseError, path.string() + ": unsupported .texr version " + std::to_string(h[4]));
    }
    ResidualHeader hdr;
    const std::uint32_t w = get_u32(h + 5), ht = get_u32(h + 9);
    if (w == 0 || ht == 0 || w > 1u << 16 || ht > 1u << 16) {
        throw Error(ErrorKind::ParseError, path.string() + ": implausible dimensions");
    }
    hdr.width = static_cast<int>(w);
    hdr.height = static_cast<int>(ht);
    if (h[13] > 2) throw Error(ErrorKind::ParseError, path.string() + ": bad PAIS code " + std::to_string(h[13]));
    hdr.pais = static_cast<Pais>(h[13]);
    if (h[14] >= kPaletteSize) throw Error(ErrorKind::ParseError, path.string() + ": bad colour index");
    hdr.source_color_index = h[14];
    return hdr;
}

}  // namespace

void write_residual(const std::filesystem::path& path, const TextureResidual& t) {
    if (t.residuals.size() != static_cast<std::size_t>(t.width) * t.height * 3) {
        throw Error(ErrorKind::InvalidArgument, "residual buffer does not match its dimensions");
    }
    std::string bytes(kMagic.begin(), kMagic.end());
    bytes.reserve(kHeaderBytes + t.residuals.size() * 2);
    bytes.push_back(static_cast<char>(kVersion));
    put_u32(bytes, static_cast<std::uint32_t>(t.width));
    put_u32(bytes, static_cast<std::uint32_t>(t.height));
    bytes.push_back(static_cast<char>(t.pais));
    bytes.push_back(static_cast<char>(t.source_color_index));
    for (std::int16_t v : t.residuals) {
        if (v < -255 || v > 255) throw Error(ErrorKind::InvalidArgument, "residual value outside [-255, 255]");
        const auto u = static_cast<std::uint16_t>(v);
        bytes.push_back(static_cast<char>(u & 0xFF));
        bytes.push_back(static_cast<char>(u >> 8));
    }
    data::atomic_write(path, bytes);

    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [k, v] : t.capture_meta) meta[k] = v;
    data::atomic_write(sidecar_path(path), meta.dump(2) + "\n");
}

ResidualHeader read_residual_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::array<unsigned char, kHeaderBytes> h{};
    if (!in.read(reinterpret_cast<char*>(h.data()), h.size())) {
        throw Error(ErrorKind::ParseError, path.string() + ": truncated header");
    }
    return parse_header(h.data(), path);
}

TextureResidual read_residual(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderBytes) throw Error(ErrorKind::ParseError, path.string() + ": truncated header");
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const ResidualHeader hdr = parse_header(raw, path);

    const std::size_t count = static_cast<std::size_t>(hdr.width) * hdr.height * 3;
    if (bytes.size() != kHeaderBytes + 2 * count) {
        throw Error(ErrorKind::ParseError, path.string() + ": payload length does not match dimensions");
    }
    TextureResidual t = TextureResidual::zeros(hdr.width, hdr.height, hdr.pais);
    t.source_color_index = hdr.source_color_index;
    const unsigned char* p = raw + kHeaderBytes;
    for (std::size_t i = 0; i < count; ++i, p += 2) {
        const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
        if (v < -255 || v > 255) throw Error(ErrorKind::ParseError, path.string() + ": residual outside [-255, 255]");
        t.residuals[i] = v;
    }

    if (std::ifstream side(sidecar_path(path)); side) {
        try {
            const auto meta = nlohmann::json::parse(side);
            for (const auto& [k, v] : meta.items()) t.capture_meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::ParseError, sidecar_path(path).string() + ": " + e.what());
        }
    }
    return t;
}

}  // namespace idforge::texture
