#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "idforge/image.hpp"
#include "idforge/imaging.hpp"
#include "idforge/manifest.hpp"
#include "idforge/rng.hpp"

namespace idforge::forge {

enum class FieldKind {
    Face,
    Signature,
    FirstName,
    MiddleName,
    Surname1,
    Surname2,
    Gender,
    Nationality,
    BirthDate,
    IssueDate,
    ExpiryDate,
    Run,
    DocumentNumber,
};
std::string_view to_string(FieldKind k) noexcept;
FieldKind parse_field_kind(std::string_view s);
constexpr bool is_text(FieldKind k) noexcept { return k != FieldKind::Face && k != FieldKind::Signature; }

struct FieldSlot {
    FieldKind kind;
    Rect rect;
    int font_size = 0;  // text kinds only
};

struct CardTemplate {
    ImageBuffer background;
    std::vector<FieldSlot> fields;

    // Throws InvalidArgument when a slot leaves the background, a text slot has
    // no font size, or face/signature are not present exactly once.
    void validate() const;
    const FieldSlot* slot(FieldKind k) const noexcept;
};

// Procedural 640x404 card with a light guilloche background.
CardTemplate builtin_template();
CardTemplate read_template(const std::filesystem::path& json_path);
// Writes `template.json` and `background.png` into `dir`.
void write_template(const std::filesystem::path& dir, const CardTemplate& tpl);

enum class Gender { F, M };
std::string_view to_string(Gender g) noexcept;
Gender parse_gender(std::string_view s);

struct Date {
    int year = 2000;
    int month = 1;
    int day = 1;
    auto operator<=>(const Date&) const = default;

    static Date from_days(long days);  // days since 1970-01-01
    long to_days() const;
    Date add_years(int years) const;   // 29 Feb falls back to 28 Feb
    bool valid() const;
};
// "15 ENE 2020"
std::string format_date(const Date& d);
// Completed years between `birth` and `on`.
int age_on(const Date& birth, const Date& on);

struct IdentityRecord {
    Gender gender = Gender::F;
    std::string first_name, middle_name, surname1, surname2;
    Date birth_date, issue_date, expiry_date;
    std::string run;
    std::string document_number;
    std::string nationality;
    std::string face_ref, signature_ref;

    friend bool operator==(const IdentityRecord&, const IdentityRecord&) = default;
};

std::string field_text(const IdentityRecord& id, FieldKind k);

// Body of 7-8 digits plus modulo-11 check digit (K for 10), "12.345.678-5".
char run_check_digit(std::uint32_t body);
std::string format_run(std::uint32_t body);

enum class AssetKind { Face, Signature };

struct Asset {
    std::string path;
    AssetKind kind = AssetKind::Face;
    std::optional<Gender> gender;  // faces only
};

struct AssetPack {
    std::vector<Asset> faces;
    std::vector<Asset> signatures;
};

// JSON list of {path, kind: face|signature, gender}; paths relative to the file.
AssetPack read_asset_pack(const std::filesystem::path& json_path);
// Deterministic geometric avatars (alternating F/M) and stroke signatures, plus
// `assets.json`. Returns the loaded pack.
AssetPack generate_placeholder_assets(const std::filesystem::path& dir, std::size_t faces, std::size_t signatures,
                                      std::uint64_t seed);

struct NameDictionaries {
    std::vector<std::string> female, male, surnames;
};
const NameDictionaries& builtin_names();
// female.txt, male.txt, surnames.txt; one name per line.
NameDictionaries read_names(const std::filesystem::path& dir);

// When `face_index` is absent the face is drawn at random; the name gender
// follows the face's tag.
IdentityRecord generate_identity(std::uint64_t seed, const AssetPack& assets,
                                 const NameDictionaries& names = builtin_names(),
                                 std::optional<std::size_t> face_index = std::nullopt);

constexpr int kMinFontPx = 8;
constexpr Rgb kInk{55, 55, 60};

ImageBuffer render_card(const CardTemplate& tpl, const IdentityRecord& id);

struct AugmentParams {
    double hue_deg = 4.0;
    double saturation = 0.05;
    double value = 0.05;
    double corner_jitter = 0.04;  // fraction of width/height, in [0, 1]
    std::uint64_t seed = 0;
};

using Quad = std::array<Point2, 4>;  // TL, TR, BR, BL
bool is_convex(const Quad& q);
// Each corner moves inwards by up to corner_jitter of the card size; resampled
// up to 8 times when the result is not convex, then DegenerateQuad.
Quad sample_quad(int width, int height, double corner_jitter, Rng& rng);
bool inside_quad(const Quad& q, double x, double y);

struct AugmentResult {
    ImageBuffer image;
    Quad quad;
};
AugmentResult augment_card_ex(const ImageBuffer& card, const AugmentParams& p);
inline ImageBuffer augment_card(const ImageBuffer& card, const AugmentParams& p) { return augment_card_ex(card, p).image; }

// Donor pixels replace recipient pixels inside each chosen slot; with feather f
// > 0 the weight ramps as min(1, (d + 1) / (f + 1)) where d is the distance in
// pixels to the slot edge.
ImageBuffer splice_composite(const ImageBuffer& recipient, const ImageBuffer& donor, const CardTemplate& tpl,
                             const std::set<FieldKind>& slots, int feather);
// Non-empty subset of the face and text slots; the face is forced with
// probability 0.8.
std::set<FieldKind> choose_splice_slots(const CardTemplate& tpl, Rng& rng);

struct ForgeBatchOptions {
    std::filesystem::path out_dir;
    std::size_t count = 0;
    data::ImageClass image_class = data::ImageClass::Bonafide;
    std::uint64_t base_seed = 0;
    unsigned threads = 1;
    AugmentParams augment;  // seed is replaced per item
    int feather = 2;
};

struct ForgeBatchResult {
    data::Manifest manifest;
    std::vector<std::pair<std::size_t, std::string>> failures;
    // Per successful item: recipient identity and the card's outline after warping.
    std::vector<IdentityRecord> identities;
    std::vector<Quad> quads;
};

// Item i uses face i mod |faces|, so consecutive batches repeat the same faces
// in the same order.
ForgeBatchResult batch_generate(const CardTemplate& tpl, const AssetPack& assets, const NameDictionaries& names,
                                const ForgeBatchOptions& options);

}  // namespace idforge::forge
