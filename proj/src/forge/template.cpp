#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "idforge/error.hpp"
#include "idforge/forge.hpp"

namespace idforge::forge {

namespace {

struct KindName {
    FieldKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 13> kKindNames{{
    {FieldKind::Face, "face"},
    {FieldKind::Signature, "signature"},
    {FieldKind::FirstName, "first_name"},
    {FieldKind::MiddleName, "middle_name"},
    {FieldKind::Surname1, "surname1"},
    {FieldKind::Surname2, "surname2"},
    {FieldKind::Gender, "gender"},
    {FieldKind::Nationality, "nationality"},
    {FieldKind::BirthDate, "birth_date"},
    {FieldKind::IssueDate, "issue_date"},
    {FieldKind::ExpiryDate, "expiry_date"},
    {FieldKind::Run, "run"},
    {FieldKind::DocumentNumber, "document_number"},
}};

Rgb mix(Rgb a, Rgb b, double t) {
    auto ch = [t](int x, int y) { return static_cast<std::uint8_t>(std::lround(x + (y - x) * t)); };
    return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b)};
}

ImageBuffer builtin_background(const std::vector<FieldSlot>& fields) {
    constexpr int kW = 640, kH = 404, kHeader = 54;
    ImageBuffer bg(kW, kH);
    const Rgb top{226, 233, 238}, bottom{204, 218, 230}, line{184, 204, 222};
    for (int y = 0; y < kH; ++y)
        for (int x = 0; x < kW; ++x) bg.set(x, y, mix(top, bottom, static_cast<double>(y) / (kH - 1)));

    // Interleaved sine bands stand in for the security guilloche.
    for (int k = 0; k < 14; ++k) {
        const double phase = k * 0.45, amp = 10.0 + 2.0 * (k % 4), base = kHeader + 12.0 + k * 25.0;
        for (int x = 0; x < kW; ++x) {
            const double y = base + amp * std::sin(2.0 * std::numbers::pi * x / 160.0 + phase) +
                             0.5 * amp * std::sin(2.0 * std::numbers::pi * x / 53.0 - phase);
            const int yi = static_cast<int>(std::lround(y));
            if (yi >= kHeader && yi < kH) bg.set(x, yi, mix(bg.at(x, yi), line, 0.7));
        }
    }

    const Rgb band{38, 78, 138};
    for (int y = 0; y < kHeader; ++y)
        for (int x = 0; x < kW; ++x) bg.set(x, y, mix(band, Rgb{58, 104, 168}, static_cast<double>(x) / (kW - 1)));
    draw_text(bg, "REPUBLICA DE CHILE", 24, 24, 14, Rgb{245, 245, 245});
    draw_text(bg, "CEDULA DE IDENTIDAD", 24, 44, 11, Rgb{225, 232, 240});

    const Rgb label{72, 92, 122};
    auto label_for = [](FieldKind k) -> std::string_view {
        switch (k) {
            case FieldKind::Surname1: return "APELLIDOS";
            case FieldKind::FirstName: return "NOMBRES";
            case FieldKind::Nationality: return "NACIONALIDAD";
            case FieldKind::Gender: return "SEXO";
            case FieldKind::DocumentNumber: return "NUMERO DOCUMENTO";
            case FieldKind::BirthDate: return "FECHA DE NACIMIENTO";
            case FieldKind::Run: return "RUN";
            case FieldKind::IssueDate: return "FECHA DE EMISION";
            case FieldKind::ExpiryDate: return "FECHA DE VENCIMIENTO";
            default: return {};
        }
    };
    for (const auto& f : fields) {
        const auto text = label_for(f.kind);
        if (!text.empty()) draw_text(bg, text, f.rect.x + 2, f.rect.y - 4, 8, label);
    }
    return bg;
}

}  // namespace

std::string_view to_string(FieldKind k) noexcept {
    for (const auto& e : kKindNames)
        if (e.kind == k) return e.name;
    return "?";
}

FieldKind parse_field_kind(std::string_view s) {
    for (const auto& e : kKindNames)
        if (e.name == s) return e.kind;
    throw Error(ErrorKind::ParseError, "unknown field kind '" + std::string(s) + "'");
}

void CardTemplate::validate() const {
    int faces = 0, signatures = 0;
    for (const auto& f : fields) {
        if (f.rect.w <= 0 || f.rect.h <= 0 || !background.contains(f.rect)) {
            throw Error(ErrorKind::InvalidArgument, "slot " + std::string(to_string(f.kind)) + " lies outside the template");
        }
        if (is_text(f.kind) && f.font_size <= 0) {
            throw Error(ErrorKind::InvalidArgument, "text slot " + std::string(to_string(f.kind)) + " needs a font size");
        }
        faces += f.kind == FieldKind::Face;
        signatures += f.kind == FieldKind::Signature;
    }
    if (faces != 1 || signatures != 1) {
        throw Error(ErrorKind::InvalidArgument, "template needs exactly one face and one signature slot");
    }
}

const FieldSlot* CardTemplate::slot(FieldKind k) const noexcept {
    for (const auto& f : fields)
        if (f.kind == k) return &f;
    return nullptr;
}

CardTemplate builtin_template() {
    static const CardTemplate tpl = [] {
        CardTemplate t;
        t.fields = {
            {FieldKind::Face, {24, 72, 168, 216}, 0},
            {FieldKind::Signature, {24, 318, 190, 64}, 0},
            {FieldKind::Surname1, {220, 84, 196, 26}, 18},
            {FieldKind::Surname2, {428, 84, 196, 26}, 18},
            {FieldKind::FirstName, {220, 136, 196, 26}, 18},
            {FieldKind::MiddleName, {428, 136, 196, 26}, 18},
            {FieldKind::Nationality, {220, 188, 120, 22}, 13},
            {FieldKind::Gender, {352, 188, 60, 22}, 13},
            {FieldKind::DocumentNumber, {428, 188, 196, 22}, 13},
            {FieldKind::BirthDate, {220, 240, 196, 22}, 13},
            {FieldKind::Run, {428, 240, 196, 22}, 13},
            {FieldKind::IssueDate, {220, 292, 196, 22}, 13},
            {FieldKind::ExpiryDate, {428, 292, 196, 22}, 13},
        };
        t.background = builtin_background(t.fields);
        t.validate();
        return t;
    }();
    return tpl;
}

CardTemplate read_template(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + json_path.string());
    CardTemplate tpl;
    try {
        const auto j = nlohmann::json::parse(in);
        std::filesystem::path bg = j.at("background").get<std::string>();
        if (bg.is_relative()) bg = json_path.parent_path() / bg;
        tpl.background = read_png(bg);
        for (const auto& f : j.at("fields")) {
            FieldSlot slot;
            slot.kind = parse_field_kind(f.at("kind").get<std::string>());
            slot.rect = {f.at("x").get<int>(), f.at("y").get<int>(), f.at("w").get<int>(), f.at("h").get<int>()};
            slot.font_size = f.value("font_size", 0);
            tpl.fields.push_back(slot);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, json_path.string() + ": " + e.what());
    }
    tpl.validate();
    return tpl;
}

void write_template(const std::filesystem::path& dir, const CardTemplate& tpl) {
    std::filesystem::create_directories(dir);
    write_png(dir / "background.png", tpl.background);
    nlohmann::json fields = nlohmann::json::array();
    for (const auto& f : tpl.fields) {
        fields.push_back({{"kind", to_string(f.kind)},
                          {"x", f.rect.x},
                          {"y", f.rect.y},
                          {"w", f.rect.w},
                          {"h", f.rect.h},
                          {"font_size", f.font_size}});
    }
    const nlohmann::json j{{"background", "background.png"}, {"fields", fields}};
    data::atomic_write(dir / "template.json", j.dump(2) + "\n");
}

}  // namespace idforge::forge
