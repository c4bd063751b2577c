#include <algorithm>
#include <cmath>
#include <cstdio>

#include "idforge/error.hpp"
#include "idforge/forge.hpp"
#include "idforge/parallel.hpp"

namespace idforge::forge {

namespace {

ImageBuffer load_asset(const std::string& ref) {
    std::error_code ec;
    if (ref.empty() || !std::filesystem::is_regular_file(ref, ec)) {
        throw Error(ErrorKind::MissingAsset, "asset '" + ref + "' not found");
    }
    return read_png(ref);
}

// Aspect-preserving fit, centred in `slot`.
Rect fit_rect(int w, int h, const Rect& slot) {
    const double scale = std::min(static_cast<double>(slot.w) / w, static_cast<double>(slot.h) / h);
    const int fw = std::clamp(static_cast<int>(std::lround(w * scale)), 1, slot.w);
    const int fh = std::clamp(static_cast<int>(std::lround(h * scale)), 1, slot.h);
    return {slot.x + (slot.w - fw) / 2, slot.y + (slot.h - fh) / 2, fw, fh};
}

template <class Blend>
void paste(ImageBuffer& dst, const ImageBuffer& src, const Rect& slot, Blend blend) {
    const Rect r = fit_rect(src.width(), src.height(), slot);
    const ImageBuffer scaled = resize(src, {r.w, r.h});
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x) dst.set(r.x + x, r.y + y, blend(dst.at(r.x + x, r.y + y), scaled.at(x, y)));
}

void render_text(ImageBuffer& card, const FieldSlot& slot, const std::string& text) {
    constexpr int kPad = 2;
    int font = slot.font_size;
    while (font > kMinFontPx && text_width(text, font) > slot.rect.w - 2 * kPad) --font;
    if (text_width(text, font) > slot.rect.w - 2 * kPad) {
        throw Error(ErrorKind::TextOverflow, "'" + text + "' does not fit the " + std::string(to_string(slot.kind)) +
                                                 " slot at " + std::to_string(kMinFontPx) + " px");
    }
    // Drawn on a copy of the slot so glyphs never leave it.
    ImageBuffer area = crop(card, slot.rect);
    draw_text(area, text, kPad, (slot.rect.h + font) / 2, font, kInk);
    for (int y = 0; y < slot.rect.h; ++y)
        for (int x = 0; x < slot.rect.w; ++x) card.set(slot.rect.x + x, slot.rect.y + y, area.at(x, y));
}

double cross(const Point2& a, const Point2& b, const Point2& c) {
    return (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
}

}  // namespace

ImageBuffer render_card(const CardTemplate& tpl, const IdentityRecord& id) {
    ImageBuffer card = tpl.background;
    for (const auto& slot : tpl.fields) {
        switch (slot.kind) {
            case FieldKind::Face:
                paste(card, load_asset(id.face_ref), slot.rect, [](Rgb, Rgb s) { return s; });
                break;
            case FieldKind::Signature:
                paste(card, load_asset(id.signature_ref), slot.rect, [](Rgb d, Rgb s) {
                    return Rgb{std::min(d.r, s.r), std::min(d.g, s.g), std::min(d.b, s.b)};
                });
                break;
            default:
                render_text(card, slot, field_text(id, slot.kind));
        }
    }
    return card;
}

bool is_convex(const Quad& q) {
    bool pos = false, neg = false;
    for (int i = 0; i < 4; ++i) {
        const double c = cross(q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        pos |= c > 0;
        neg |= c < 0;
        if (c == 0) return false;
    }
    return pos != neg;
}

bool inside_quad(const Quad& q, double x, double y) {
    constexpr double kEps = 1e-7;
    bool pos = false, neg = false;
    for (int i = 0; i < 4; ++i) {
        const Point2& a = q[i];
        const Point2& b = q[(i + 1) % 4];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const double c = ((b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x)) / len;
        pos |= c > kEps;
        neg |= c < -kEps;
    }
    return !(pos && neg);
}

Quad sample_quad(int width, int height, double corner_jitter, Rng& rng) {
    const double mx = corner_jitter * (width - 1), my = corner_jitter * (height - 1);
    const double r = width - 1, b = height - 1;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Quad q;
        q[0] = {rng.uniform(0, mx), rng.uniform(0, my)};
        q[1] = {r - rng.uniform(0, mx), rng.uniform(0, my)};
        q[2] = {r - rng.uniform(0, mx), b - rng.uniform(0, my)};
        q[3] = {rng.uniform(0, mx), b - rng.uniform(0, my)};
        if (is_convex(q)) return q;
    }
    throw Error(ErrorKind::DegenerateQuad, "jittered corners were not convex after 8 attempts");
}

AugmentResult augment_card_ex(const ImageBuffer& card, const AugmentParams& p) {
    if (!(p.hue_deg >= 0 && p.hue_deg <= 180 && p.saturation >= 0 && p.saturation <= 1 && p.value >= 0 &&
          p.value <= 1 && p.corner_jitter >= 0 && p.corner_jitter <= 1)) {
        throw Error(ErrorKind::InvalidArgument, "augmentation parameters out of range");
    }
    Rng rng(p.seed);
    const double dh = rng.uniform(-p.hue_deg, p.hue_deg);
    const double ds = rng.uniform(-p.saturation, p.saturation);
    const double dv = rng.uniform(-p.value, p.value);

    ImageBuffer shifted = card;
    if (p.hue_deg > 0 || p.saturation > 0 || p.value > 0) {
        for (int y = 0; y < card.height(); ++y)
            for (int x = 0; x < card.width(); ++x) {
                Hsv c = rgb_to_hsv(card.at(x, y));
                c.h = std::fmod(c.h + dh + 360.0, 360.0);
                c.s = std::clamp(c.s + ds, 0.0, 1.0);
                c.v = std::clamp(c.v + dv, 0.0, 1.0);
                shifted.set(x, y, hsv_to_rgb(c));
            }
    }

    const int w = card.width(), h = card.height();
    const Quad full{{{0, 0}, {w - 1.0, 0}, {w - 1.0, h - 1.0}, {0, h - 1.0}}};
    AugmentResult result{ImageBuffer(1, 1), full};
    if (p.corner_jitter == 0) {
        result.image = std::move(shifted);
        return result;
    }
    result.quad = sample_quad(w, h, p.corner_jitter, rng);
    result.image = warp_projective(shifted, Homography::from_quad(full, result.quad), {w, h});
    return result;
}

ImageBuffer splice_composite(const ImageBuffer& recipient, const ImageBuffer& donor, const CardTemplate& tpl,
                             const std::set<FieldKind>& slots, int feather) {
    const int w = recipient.width(), h = recipient.height();
    if (donor.width() != w || donor.height() != h || tpl.background.width() != w || tpl.background.height() != h) {
        throw Error(ErrorKind::GeometryMismatch, "recipient, donor and template must share dimensions");
    }
    if (slots.empty()) throw Error(ErrorKind::InvalidArgument, "splice needs at least one slot");
    if (feather < 0) throw Error(ErrorKind::InvalidArgument, "feather must be >= 0");

    std::vector<double> alpha(static_cast<std::size_t>(w) * h, 0.0);
    for (FieldKind k : slots) {
        const FieldSlot* s = tpl.slot(k);
        if (!s) throw Error(ErrorKind::InvalidArgument, "template has no " + std::string(to_string(k)) + " slot");
        const Rect& r = s->rect;
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x) {
                const int d = std::min({x - r.x, r.x + r.w - 1 - x, y - r.y, r.y + r.h - 1 - y});
                const double a = feather == 0 ? 1.0 : std::min(1.0, (d + 1.0) / (feather + 1.0));
                double& cell = alpha[static_cast<std::size_t>(y) * w + x];
                cell = std::max(cell, a);
            }
    }

    ImageBuffer out = recipient;
    const auto src = donor.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double a = alpha[i / 3];
        if (a == 0.0) continue;
        dst[i] = a == 1.0 ? src[i] : static_cast<std::uint8_t>(std::lround(a * src[i] + (1.0 - a) * dst[i]));
    }
    return out;
}

std::set<FieldKind> choose_splice_slots(const CardTemplate& tpl, Rng& rng) {
    std::vector<FieldKind> text;
    for (const auto& f : tpl.fields)
        if (is_text(f.kind)) text.push_back(f.kind);
    std::set<FieldKind> out;
    if (rng.bernoulli(0.8)) {
        out.insert(FieldKind::Face);
        for (auto k : text)
            if (rng.bernoulli(0.5)) out.insert(k);
        return out;
    }
    while (out.empty()) {
        if (rng.bernoulli(0.5)) out.insert(FieldKind::Face);
        for (auto k : text)
            if (rng.bernoulli(0.5)) out.insert(k);
    }
    return out;
}

ForgeBatchResult batch_generate(const CardTemplate& tpl, const AssetPack& assets, const NameDictionaries& names,
                                const ForgeBatchOptions& options) {
    ForgeBatchResult result;
    if (options.image_class != data::ImageClass::Bonafide && options.image_class != data::ImageClass::Composite) {
        throw Error(ErrorKind::InvalidArgument, "template batches produce bonafide or composite cards only");
    }
    if (options.count == 0) return result;
    if (assets.faces.empty()) throw Error(ErrorKind::EmptyAssetPool, "asset pack has no faces");
    tpl.validate();
    std::filesystem::create_directories(options.out_dir);

    const std::size_t n = options.count, faces = assets.faces.size();
    const bool composite = options.image_class == data::ImageClass::Composite;
    struct Item {
        std::optional<data::ManifestRow> row;
        std::optional<IdentityRecord> id;
        Quad quad{};
        std::string error;
    };
    std::vector<Item> items(n);

    parallel_for(n, options.threads, [&](std::size_t i) {
        const std::uint64_t item_seed = options.base_seed + i;
        try {
            const std::size_t face = i % faces;
            IdentityRecord id = generate_identity(mix_seed(item_seed, 0), assets, names, face);
            ImageBuffer card = render_card(tpl, id);
            if (composite) {
                Rng rng(mix_seed(item_seed, 1));
                const std::size_t donor_face = faces > 1 ? (face + 1 + rng.index(faces - 1)) % faces : face;
                const IdentityRecord donor = generate_identity(mix_seed(item_seed, 2), assets, names, donor_face);
                card = splice_composite(card, render_card(tpl, donor), tpl, choose_splice_slots(tpl, rng),
                                        options.feather);
            }
            AugmentParams aug = options.augment;
            aug.seed = mix_seed(item_seed, 3);
            const AugmentResult out = augment_card_ex(card, aug);

            char name[64];
            std::snprintf(name, sizeof name, "%s_%06zu.png", std::string(data::to_string(options.image_class)).c_str(), i);
            const auto path = options.out_dir / name;
            write_png(path, out.image);
            items[i].row = data::ManifestRow{path.string(), options.image_class, data::Origin::Templates,
                                             data::Split::Train, item_seed};
            items[i].id = std::move(id);
            items[i].quad = out.quad;
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (items[i].row) {
            result.manifest.push_back(std::move(*items[i].row));
            result.identities.push_back(std::move(*items[i].id));
            result.quads.push_back(items[i].quad);
        } else {
            result.failures.emplace_back(i, std::move(items[i].error));
        }
    }
    return result;
}

}  // namespace idforge::forge
