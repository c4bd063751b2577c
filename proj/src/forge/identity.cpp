#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "idforge/error.hpp"
#include "idforge/forge.hpp"

namespace idforge::forge {

namespace {

constexpr std::array<std::string_view, 12> kMonths{"ENE", "FEB", "MAR", "ABR", "MAY", "JUN",
                                                   "JUL", "AGO", "SEP", "OCT", "NOV", "DIC"};

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : kDays[static_cast<std::size_t>(m - 1)];
}

const Date kIssueFirst{2012, 1, 1};
const Date kIssueLast{2024, 12, 31};
constexpr int kMinAge = 18;
constexpr int kMaxAge = 90;
constexpr int kValidityYears = 10;

std::string group_thousands(std::uint32_t v) {
    std::string digits = std::to_string(v), out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out += '.';
        out += digits[i];
    }
    return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

// --- placeholder assets -----------------------------------------------------

void fill_ellipse(ImageBuffer& img, double cx, double cy, double rx, double ry, Rgb c, double y_max = 1e9) {
    const int y0 = std::max(0, static_cast<int>(cy - ry)), y1 = std::min(img.height() - 1, static_cast<int>(cy + ry) + 1);
    const int x0 = std::max(0, static_cast<int>(cx - rx)), x1 = std::min(img.width() - 1, static_cast<int>(cx + rx) + 1);
    for (int y = y0; y <= y1; ++y) {
        if (y > y_max) break;
        for (int x = x0; x <= x1; ++x) {
            const double dx = (x - cx) / rx, dy = (y - cy) / ry;
            if (dx * dx + dy * dy <= 1.0) img.set(x, y, c);
        }
    }
}

Rgb hsv(double h, double s, double v) { return hsv_to_rgb({std::fmod(h + 360.0, 360.0), s, v}); }

ImageBuffer placeholder_face(Gender g, Rng& rng) {
    constexpr int kW = 120, kH = 150;
    ImageBuffer img(kW, kH, hsv(rng.uniform(0, 360), 0.12, 0.92));
    static constexpr std::array<Rgb, 6> kSkin{{{241, 204, 177}, {224, 172, 140}, {198, 140, 106},
                                              {160, 106, 76}, {120, 80, 58}, {232, 190, 160}}};
    const Rgb skin = kSkin[rng.index(kSkin.size())];
    const Rgb hair = hsv(rng.uniform(15, 40), rng.uniform(0.3, 0.7), rng.uniform(0.15, 0.55));
    const Rgb cloth = hsv(rng.uniform(0, 360), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7));
    const double head_rx = rng.uniform(26, 32), head_ry = rng.uniform(34, 40);

    if (g == Gender::F) fill_ellipse(img, 60, 78, head_rx + 12, head_ry + 20, hair);
    fill_ellipse(img, 60, 168, 56, 46, cloth);
    fill_ellipse(img, 60, 118, 12, 18, skin);
    fill_ellipse(img, 60, 70, head_rx, head_ry, skin);
    if (g == Gender::F) {
        fill_ellipse(img, 60, 46, head_rx + 4, 20, hair, 50);
    } else {
        fill_ellipse(img, 60, 44, head_rx + 1, rng.uniform(12, 18), hair, 48);
    }
    const Rgb eye{48, 44, 52};
    fill_ellipse(img, 60 - head_rx * 0.4, 66, 3.5, 2.5, eye);
    fill_ellipse(img, 60 + head_rx * 0.4, 66, 3.5, 2.5, eye);
    fill_ellipse(img, 60, 92, 9, 2, Rgb{150, 72, 70});
    return img;
}

ImageBuffer placeholder_signature(Rng& rng) {
    constexpr int kW = 200, kH = 64;
    ImageBuffer img(kW, kH, Rgb{252, 252, 250});
    const Rgb ink = hsv(rng.uniform(215, 235), rng.uniform(0.6, 0.85), rng.uniform(0.35, 0.55));
    std::array<double, 3> amp{}, freq{}, phase{};
    for (int k = 0; k < 3; ++k) {
        amp[k] = rng.uniform(3, 10);
        freq[k] = rng.uniform(1, 6);
        phase[k] = rng.uniform(0, 2 * std::numbers::pi);
    }
    const double loop_r = rng.uniform(4, 10), loops = rng.uniform(3, 7);
    for (int i = 0; i <= 2400; ++i) {
        const double t = i / 2400.0;
        double x = 14 + t * 172 + loop_r * std::cos(2 * std::numbers::pi * loops * t);
        double y = 32 + loop_r * std::sin(2 * std::numbers::pi * loops * t);
        for (int k = 0; k < 3; ++k) y += amp[k] * std::sin(2 * std::numbers::pi * freq[k] * t + phase[k]) / 2;
        fill_ellipse(img, x, y, 1.3, 1.3, ink);
    }
    return img;
}

}  // namespace

// --- dates --------------------------------------------------------------------

Date Date::from_days(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const long doe = z - era * 146097;
    const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const long mp = (5 * doy + 2) / 153;
    const int d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    const int m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    return {static_cast<int>(yoe + era * 400 + (m <= 2)), m, d};
}

long Date::to_days() const {
    const long y = year - (month <= 2);
    const long era = (y >= 0 ? y : y - 399) / 400;
    const long yoe = y - era * 400;
    const long doy = (153 * (month > 2 ? month - 3 : month + 9) + 2) / 5 + day - 1;
    const long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

Date Date::add_years(int years) const {
    Date d{year + years, month, day};
    d.day = std::min(d.day, days_in_month(d.year, d.month));
    return d;
}

bool Date::valid() const { return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month); }

std::string format_date(const Date& d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d %s %04d", d.day, kMonths[static_cast<std::size_t>(d.month - 1)].data(), d.year);
    return buf;
}

int age_on(const Date& birth, const Date& on) {
    int age = on.year - birth.year;
    if (std::pair{on.month, on.day} < std::pair{birth.month, birth.day}) --age;
    return age;
}

std::string_view to_string(Gender g) noexcept { return g == Gender::F ? "F" : "M"; }

Gender parse_gender(std::string_view s) {
    if (s == "F") return Gender::F;
    if (s == "M") return Gender::M;
    throw Error(ErrorKind::ParseError, "gender must be F or M, got '" + std::string(s) + "'");
}

// --- RUN ----------------------------------------------------------------------

char run_check_digit(std::uint32_t body) {
    int sum = 0, weight = 2;
    for (; body > 0; body /= 10) {
        sum += static_cast<int>(body % 10) * weight;
        weight = weight == 7 ? 2 : weight + 1;
    }
    const int r = 11 - sum % 11;
    return r == 11 ? '0' : r == 10 ? 'K' : static_cast<char>('0' + r);
}

std::string format_run(std::uint32_t body) { return group_thousands(body) + "-" + run_check_digit(body); }

std::string field_text(const IdentityRecord& id, FieldKind k) {
    switch (k) {
        case FieldKind::FirstName: return id.first_name;
        case FieldKind::MiddleName: return id.middle_name;
        case FieldKind::Surname1: return id.surname1;
        case FieldKind::Surname2: return id.surname2;
        case FieldKind::Gender: return std::string(to_string(id.gender));
        case FieldKind::Nationality: return id.nationality;
        case FieldKind::BirthDate: return format_date(id.birth_date);
        case FieldKind::IssueDate: return format_date(id.issue_date);
        case FieldKind::ExpiryDate: return format_date(id.expiry_date);
        case FieldKind::Run: return id.run;
        case FieldKind::DocumentNumber: return id.document_number;
        case FieldKind::Face:
        case FieldKind::Signature: break;
    }
    throw Error(ErrorKind::InvalidArgument, std::string(to_string(k)) + " is not a text field");
}

// --- assets and names ---------------------------------------------------------

AssetPack read_asset_pack(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + json_path.string());
    AssetPack pack;
    try {
        const auto j = nlohmann::json::parse(in);
        for (const auto& a : j) {
            Asset asset;
            std::filesystem::path p = a.at("path").get<std::string>();
            if (p.is_relative()) p = json_path.parent_path() / p;
            asset.path = p.string();
            const auto kind = a.at("kind").get<std::string>();
            if (kind == "face") {
                asset.kind = AssetKind::Face;
                if (!a.contains("gender")) throw Error(ErrorKind::ParseError, "face " + asset.path + " has no gender tag");
                asset.gender = parse_gender(a.at("gender").get<std::string>());
                pack.faces.push_back(std::move(asset));
            } else if (kind == "signature") {
                asset.kind = AssetKind::Signature;
                pack.signatures.push_back(std::move(asset));
            } else {
                throw Error(ErrorKind::ParseError, "asset kind must be face or signature, got '" + kind + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, json_path.string() + ": " + e.what());
    }
    return pack;
}

AssetPack generate_placeholder_assets(const std::filesystem::path& dir, std::size_t faces, std::size_t signatures,
                                      std::uint64_t seed) {
    std::filesystem::create_directories(dir / "faces");
    std::filesystem::create_directories(dir / "signatures");
    nlohmann::json list = nlohmann::json::array();
    char name[64];
    for (std::size_t i = 0; i < faces; ++i) {
        const Gender g = i % 2 == 0 ? Gender::F : Gender::M;
        Rng rng(mix_seed(seed, 2 * i));
        std::snprintf(name, sizeof name, "faces/face_%05zu.png", i);
        write_png(dir / name, placeholder_face(g, rng));
        list.push_back({{"path", name}, {"kind", "face"}, {"gender", to_string(g)}});
    }
    for (std::size_t i = 0; i < signatures; ++i) {
        Rng rng(mix_seed(seed, 2 * i + 1));
        std::snprintf(name, sizeof name, "signatures/sig_%05zu.png", i);
        write_png(dir / name, placeholder_signature(rng));
        list.push_back({{"path", name}, {"kind", "signature"}});
    }
    data::atomic_write(dir / "assets.json", list.dump(2) + "\n");
    return read_asset_pack(dir / "assets.json");
}

const NameDictionaries& builtin_names() {
    static const NameDictionaries names{
        {"SOFIA",    "ISIDORA",  "FLORENCIA", "JOSEFA",   "AGUSTINA", "EMILIA",   "MARTINA",  "TRINIDAD",
         "ANTONELLA", "FERNANDA", "CATALINA", "VALENTINA", "CONSTANZA", "JAVIERA", "MARIA",    "CAMILA",
         "DANIELA",  "FRANCISCA", "PAULINA",  "CAROLINA", "GABRIELA", "ANDREA",   "PATRICIA", "CLAUDIA",
         "XIMENA",   "LORENA",   "VERONICA", "MONICA",   "ROSA",     "ELENA",    "LUCIA",    "ISABEL",
         "ANA",      "TERESA",   "JULIA",    "AMANDA",   "PAZ",      "IGNACIA",  "ANTONIA",  "BARBARA"},
        {"MATEO",    "AGUSTIN",  "BENJAMIN", "VICENTE",  "TOMAS",    "MAXIMILIANO", "JOAQUIN", "LUCAS",
         "SANTIAGO", "MARTIN",   "JOSE",     "JUAN",     "CARLOS",   "LUIS",     "JORGE",    "PEDRO",
         "DIEGO",    "FELIPE",   "SEBASTIAN", "MATIAS",  "NICOLAS",  "CRISTOBAL", "IGNACIO", "FRANCISCO",
         "RODRIGO",  "GONZALO",  "ALEJANDRO", "RICARDO", "EDUARDO",  "MANUEL",   "PABLO",    "ANDRES",
         "FERNANDO", "RAUL",     "HUGO",     "VICTOR",   "CLAUDIO",  "GABRIEL",  "EMILIO",   "SAMUEL"},
        {"GONZALEZ", "MUNOZ",   "ROJAS",    "DIAZ",     "PEREZ",    "SOTO",     "CONTRERAS", "SILVA",
         "MARTINEZ", "SEPULVEDA", "MORALES", "RODRIGUEZ", "LOPEZ",  "FUENTES",  "HERNANDEZ", "TORRES",
         "ARAYA",    "FLORES",   "ESPINOZA", "VALENZUELA", "CASTILLO", "TAPIA",  "REYES",    "GUTIERREZ",
         "CASTRO",   "PIZARRO",  "ALVAREZ",  "VASQUEZ",  "SANCHEZ",  "FERNANDEZ", "RAMIREZ", "CARRASCO",
         "GOMEZ",    "CORTES",   "HERRERA",  "NUNEZ",    "JARA",     "VERGARA",  "RIVERA",   "FIGUEROA",
         "RIQUELME", "GARCIA",   "MIRANDA",  "BRAVO",    "VERA",     "MOLINA",   "VEGA",     "CAMPOS",
         "SANDOVAL", "ORELLANA", "ZUNIGA",   "OLIVARES", "ALARCON",  "GALLARDO", "ORTIZ",    "GARRIDO"}};
    return names;
}

NameDictionaries read_names(const std::filesystem::path& dir) {
    return {read_lines(dir / "female.txt"), read_lines(dir / "male.txt"), read_lines(dir / "surnames.txt")};
}

// --- identities ---------------------------------------------------------------

IdentityRecord generate_identity(std::uint64_t seed, const AssetPack& assets, const NameDictionaries& names,
                                 std::optional<std::size_t> face_index) {
    const bool has_f = std::any_of(assets.faces.begin(), assets.faces.end(), [](const Asset& a) { return a.gender == Gender::F; });
    const bool has_m = std::any_of(assets.faces.begin(), assets.faces.end(), [](const Asset& a) { return a.gender == Gender::M; });
    if (!has_f || !has_m) throw Error(ErrorKind::EmptyAssetPool, "asset pack needs at least one face per gender");
    if (assets.signatures.empty()) throw Error(ErrorKind::EmptyAssetPool, "asset pack has no signatures");
    if (names.female.empty() || names.male.empty() || names.surnames.empty()) {
        throw Error(ErrorKind::EmptyAssetPool, "name dictionaries must not be empty");
    }
    if (face_index && *face_index >= assets.faces.size()) {
        throw Error(ErrorKind::InvalidArgument, "face index " + std::to_string(*face_index) + " out of range");
    }

    Rng rng(seed);
    IdentityRecord id;
    const Asset& face = assets.faces[face_index ? *face_index : rng.index(assets.faces.size())];
    id.face_ref = face.path;
    id.gender = *face.gender;
    id.signature_ref = assets.signatures[rng.index(assets.signatures.size())].path;

    const auto& first = id.gender == Gender::F ? names.female : names.male;
    id.first_name = first[rng.index(first.size())];
    id.middle_name = first[rng.index(first.size())];
    for (int tries = 0; id.middle_name == id.first_name && first.size() > 1 && tries < 16; ++tries) {
        id.middle_name = first[rng.index(first.size())];
    }
    id.surname1 = names.surnames[rng.index(names.surnames.size())];
    id.surname2 = names.surnames[rng.index(names.surnames.size())];
    id.nationality = "CHILENA";

    id.issue_date = Date::from_days(rng.uniform_int(kIssueFirst.to_days(), kIssueLast.to_days()));
    const int age = static_cast<int>(rng.uniform_int(kMinAge, kMaxAge));
    // Any day in (issue - (age+1) years, issue - age years] gives exactly `age`.
    const long latest = id.issue_date.add_years(-age).to_days();
    const long earliest = id.issue_date.add_years(-age - 1).to_days() + 1;
    id.birth_date = Date::from_days(rng.uniform_int(earliest, latest));
    id.expiry_date = id.issue_date.add_years(kValidityYears);

    id.run = format_run(static_cast<std::uint32_t>(rng.uniform_int(1'000'000, 99'999'999)));
    id.document_number = group_thousands(static_cast<std::uint32_t>(rng.uniform_int(100'000'000, 999'999'999)));
    return id;
}

}  // namespace idforge::forge
