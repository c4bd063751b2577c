#include "idforge/manifest.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "idforge/error.hpp"

namespace idforge::data {

using nlohmann::json;

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<Enum, N>& values, std::string_view what) {
    for (Enum v : values) {
        if (to_string(v) == s) return v;
    }
    throw Error(ErrorKind::ParseError, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

ManifestRow row_from_json(const json& j) {
    ManifestRow row;
    row.path = j.at("path").get<std::string>();
    row.image_class = parse_class(j.at("class").get<std::string>());
    row.origin = parse_origin(j.at("origin").get<std::string>());
    row.split = parse_split(j.at("split").get<std::string>());
    if (auto it = j.find("seed"); it != j.end() && !it->is_null()) row.seed = it->get<std::uint64_t>();
    return row;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

}  // namespace

std::string_view to_string(ImageClass c) noexcept {
    switch (c) {
        case ImageClass::Bonafide: return "bonafide";
        case ImageClass::Composite: return "composite";
        case ImageClass::Print: return "print";
        case ImageClass::Screen: return "screen";
    }
    return "?";
}

std::string_view to_string(Origin o) noexcept {
    switch (o) {
        case Origin::Captured: return "captured";
        case Origin::Templates: return "templates";
        case Origin::StyleGan2: return "stylegan2";
        case Origin::CycleGan: return "cyclegan";
        case Origin::Textures: return "textures";
    }
    return "?";
}

std::string_view to_string(Split s) noexcept {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

ImageClass parse_class(std::string_view s) {
    return parse_enum(s, std::array{ImageClass::Bonafide, ImageClass::Composite, ImageClass::Print, ImageClass::Screen},
                      "class");
}

Origin parse_origin(std::string_view s) {
    return parse_enum(
        s, std::array{Origin::Captured, Origin::Templates, Origin::StyleGan2, Origin::CycleGan, Origin::Textures}, "origin");
}

Split parse_split(std::string_view s) { return parse_enum(s, std::array{Split::Train, Split::Val, Split::Test}, "split"); }

Manifest parse_manifest(std::istream& in) {
    Manifest rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            rows.push_back(row_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ParseError, "manifest line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::ParseError, "manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open manifest " + path.string());
    return parse_manifest(in);
}

std::string to_jsonl(const ManifestRow& row) {
    json j = {{"path", row.path},
              {"class", to_string(row.image_class)},
              {"origin", to_string(row.origin)},
              {"split", to_string(row.split)}};
    if (row.seed) j["seed"] = *row.seed;
    return j.dump();
}

void write_manifest_stream(std::ostream& out, const Manifest& rows) {
    for (const auto& row : rows) out << to_jsonl(row) << '\n';
}

void write_manifest(const std::filesystem::path& path, const Manifest& rows) {
    std::ostringstream out;
    write_manifest_stream(out, rows);
    atomic_write(path, out.str());
}

Manifest import_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, path.string() + ": empty CSV");
    const auto header = split_csv_line(line);
    auto column = [&](std::string_view name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int c_path = column("path"), c_class = column("class"), c_origin = column("origin"), c_split = column("split"),
              c_seed = column("seed");
    if (c_path < 0 || c_class < 0 || c_origin < 0 || c_split < 0) {
        throw Error(ErrorKind::ParseError, path.string() + ": CSV header needs path,class,origin,split");
    }

    Manifest rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        auto cell = [&](int idx) -> const std::string& {
            if (idx >= static_cast<int>(cells.size())) {
                throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": missing column");
            }
            return cells[idx];
        };
        ManifestRow row;
        row.path = cell(c_path);
        row.image_class = parse_class(cell(c_class));
        row.origin = parse_origin(cell(c_origin));
        row.split = parse_split(cell(c_split));
        if (c_seed >= 0 && c_seed < static_cast<int>(cells.size()) && !cells[c_seed].empty()) {
            try {
                row.seed = std::stoull(cells[c_seed]);
            } catch (const std::exception&) {
                throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad seed");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void atomic_write(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error(ErrorKind::IoError, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace idforge::data
