#include "idforge/cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "idforge/dataset.hpp"
#include "idforge/fid.hpp"
#include "idforge/forge.hpp"
#include "idforge/pad.hpp"
#include "idforge/parallel.hpp"
#include "idforge/texture.hpp"

namespace idforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

ExitCode exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::BadFractions: return kUsage;
        default: return kData;
    }
}

namespace {

// Argument combinations CLI11 cannot express declaratively.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 0;
    unsigned threads = default_thread_count();
    std::string log_level = "info";
    bool json = false;
};

class Output {
public:
    Output(std::ostream& out, const Globals& g) : out_(out), g_(g) {}

    // Machine JSON with --json, otherwise one "key: value" line per field.
    void emit(const json& j) {
        if (g_.json) {
            out_ << j.dump(2) << '\n';
            return;
        }
        for (const auto& [key, value] : j.items()) {
            out_ << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
        }
    }

    std::ostream& raw() { return out_; }

private:
    std::ostream& out_;
    const Globals& g_;
};

void configure_logging(const std::string& level) {
    static const auto logger = [] {
        auto l = spdlog::stderr_logger_mt("idforge");
        l->set_pattern("[%l] %v");
        return l;
    }();
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(level));
}

std::string iso(const forge::Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

json identity_json(const forge::IdentityRecord& id, const std::string& image) {
    return {{"image", image},
            {"gender", forge::to_string(id.gender)},
            {"first_name", id.first_name},
            {"middle_name", id.middle_name},
            {"surname1", id.surname1},
            {"surname2", id.surname2},
            {"birth_date", iso(id.birth_date)},
            {"issue_date", iso(id.issue_date)},
            {"expiry_date", iso(id.expiry_date)},
            {"run", id.run},
            {"document_number", id.document_number},
            {"nationality", id.nationality},
            {"face_ref", id.face_ref},
            {"signature_ref", id.signature_ref}};
}

template <class Failures>
json failures_json(const Failures& failures) {
    json arr = json::array();
    for (const auto& f : failures) arr.push_back(f);
    return arr;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    data::atomic_write(path, text);
}

const std::vector<std::string> kClassNames{"bonafide", "composite", "print", "screen"};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Globals g;
    CLI::App app{"idforge: ID-card presentation-attack data synthesis and evaluation", "idforge"};
    app.set_config("--config", "", "TOML/INI file with default flag values; explicit flags win");
    app.add_option("--seed", g.seed, "Base seed for randomized commands")->envname("IDFORGE_SEED");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
    app.add_option("--log-level", g.log_level, "Log level on stderr")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
        ->capture_default_str();
    app.add_flag("--json", g.json, "Machine-readable output and errors");
    app.require_subcommand(1);
    app.fallthrough();

    Output o(out, g);
    std::vector<std::pair<CLI::App*, std::function<int()>>> handlers;
    auto on = [&](CLI::App* sub, std::function<int()> fn) { handlers.emplace_back(sub, std::move(fn)); };
    auto seeded = [&](json j) {
        j["seed"] = g.seed;
        return j;
    };

    // ---- palette ----------------------------------------------------------
    auto* palette = app.add_subcommand("palette", "Colour calibration palette")->require_subcommand(1);
    struct {
        fs::path out;
        int per_page = texture::kColorsPerPage;
    } pg;
    auto* palette_gen = palette->add_subcommand("gen", "Write the 50 tagged palette images and print pages");
    palette_gen->add_option("--out", pg.out)->required();
    palette_gen->add_option("--per-page", pg.per_page)->check(CLI::Range(1, texture::kPaletteSize))->capture_default_str();
    on(palette_gen, [&] {
        const auto files = texture::generate_palette(pg.out, pg.per_page);
        o.emit({{"images", files.images.size()}, {"pages", files.pages.size()}, {"out", pg.out.string()}});
        return kOk;
    });

    // ---- texture ----------------------------------------------------------
    auto* tex = app.add_subcommand("texture", "Texture residual isolation and application")->require_subcommand(1);
    struct {
        fs::path in, out, color_map;
        std::string pais = "print_plain";
    } ti;
    auto* tex_isolate = tex->add_subcommand("isolate", "Extract .texr residuals from palette captures");
    tex_isolate->add_option("--in", ti.in, "Directory of captured palette PNGs")->required()->check(CLI::ExistingDirectory);
    tex_isolate->add_option("--out", ti.out, "Residual store directory")->required();
    tex_isolate->add_option("--color-map", ti.color_map, "JSON {file name: colour index} fallback")
        ->check(CLI::ExistingFile);
    tex_isolate->add_option("--pais", ti.pais)
        ->check(CLI::IsMember({"print_plain", "print_glossy", "screen"}))
        ->capture_default_str();
    on(tex_isolate, [&] {
        const auto captures = list_images(ti.in);
        if (captures.empty()) throw Error(ErrorKind::IoError, "no PNG captures in " + ti.in.string());
        std::optional<texture::ColorMap> cmap;
        if (!ti.color_map.empty()) cmap = texture::read_color_map(ti.color_map);
        const texture::Pais pais = texture::parse_pais(ti.pais);
        fs::create_directories(ti.out);

        std::vector<std::string> errors(captures.size());
        parallel_for(captures.size(), g.threads, [&](std::size_t i) {
            const auto& path = captures[i];
            try {
                texture::PaletteCapture cap{read_png(path), std::nullopt};
                const int index =
                    texture::decode_color_tag(cap.image, path.filename().string(), cmap ? &*cmap : nullptr);
                cap.decoded_color_index = index;
                texture::IsolateOptions opts;
                opts.pais = pais;
                opts.capture_meta["source"] = path.filename().string();
                const auto residual = texture::isolate_texture(cap, texture::palette_color(index), opts);
                texture::write_residual(ti.out / (path.stem().string() + ".texr"), residual);
            } catch (const std::exception& e) {
                errors[i] = path.filename().string() + ": " + e.what();
            }
        });
        std::vector<std::string> failures;
        for (auto& e : errors)
            if (!e.empty()) {
                spdlog::warn("{}", e);
                failures.push_back(std::move(e));
            }
        o.emit({{"captures", captures.size()},
                {"written", captures.size() - failures.size()},
                {"failures", failures_json(failures)}});
        return failures.empty() ? kOk : kData;
    });

    struct {
        fs::path in, out;
    } tv;
    auto* tex_vis = tex->add_subcommand("visualize", "Render a residual as a viewable PNG");
    tex_vis->add_option("--in", tv.in, ".texr file")->required()->check(CLI::ExistingFile);
    tex_vis->add_option("--out", tv.out, "PNG path")->required();
    on(tex_vis, [&] {
        const auto residual = texture::read_residual(tv.in);
        if (tv.out.has_parent_path()) fs::create_directories(tv.out.parent_path());
        write_png(tv.out, texture::visualize_residual(residual));
        o.emit({{"width", residual.width}, {"height", residual.height}, {"out", tv.out.string()}});
        return kOk;
    });

    struct {
        fs::path base, store, out;
        std::string pais = "print";
        std::size_t n = 0;
        bool all_pixels = false, tile = false;
    } ta;
    auto* tex_apply = tex->add_subcommand("apply", "Texture bona fide cards into print or screen attacks");
    tex_apply->add_option("--base", ta.base, "Directory of bona fide PNGs")->required()->check(CLI::ExistingDirectory);
    tex_apply->add_option("--store", ta.store, "Residual store directory")->required()->check(CLI::ExistingDirectory);
    tex_apply->add_option("--pais", ta.pais)->required()->check(CLI::IsMember({"print", "screen"}));
    tex_apply->add_option("--n", ta.n, "Number of attack images")->required();
    tex_apply->add_option("--out", ta.out)->required();
    tex_apply->add_flag("--all-pixels", ta.all_pixels, "Also texture exact-black background pixels");
    tex_apply->add_flag("--tile", ta.tile, "Mirror-tile residuals smaller than the card");
    on(tex_apply, [&] {
        texture::TextureBatchOptions opts;
        opts.bonafide_dir = ta.base;
        opts.residual_store = ta.store;
        opts.out_dir = ta.out;
        opts.species = texture::parse_species(ta.pais);
        opts.count = ta.n;
        opts.base_seed = g.seed;
        opts.threads = g.threads;
        opts.apply = {!ta.all_pixels, ta.tile};
        const auto result = texture::batch_textures(opts);
        fs::create_directories(ta.out);
        data::write_manifest(ta.out / "manifest.jsonl", result.manifest);
        std::vector<std::string> failures;
        for (const auto& f : result.failures) {
            failures.push_back("item " + std::to_string(f.item) + ": " + f.message);
            spdlog::warn("{}", failures.back());
        }
        o.emit(seeded({{"written", result.manifest.size()},
                       {"manifest", (ta.out / "manifest.jsonl").string()},
                       {"failures", failures_json(failures)}}));
        return failures.empty() ? kOk : kData;
    });

    // ---- template ---------------------------------------------------------
    auto* tpl = app.add_subcommand("template", "Synthetic card generation")->require_subcommand(1);
    struct {
        fs::path tpl, assets, names, out;
        std::string cls = "bonafide";
        std::size_t n = 0;
        forge::AugmentParams aug;
        int feather = 2;
    } tg;
    auto* tpl_gen = tpl->add_subcommand("gen", "Render bona fide or composite cards");
    tpl_gen->add_option("--template", tg.tpl, "Template JSON (built-in card when omitted)")->check(CLI::ExistingFile);
    tpl_gen->add_option("--assets", tg.assets, "Asset pack JSON")->required()->check(CLI::ExistingFile);
    tpl_gen->add_option("--names", tg.names, "Directory with female.txt, male.txt, surnames.txt")
        ->check(CLI::ExistingDirectory);
    tpl_gen->add_option("--class", tg.cls)->check(CLI::IsMember({"bonafide", "composite"}))->capture_default_str();
    tpl_gen->add_option("--n", tg.n, "Number of cards")->required();
    tpl_gen->add_option("--out", tg.out)->required();
    tpl_gen->add_option("--hue", tg.aug.hue_deg, "Max hue shift in degrees")->check(CLI::Range(0.0, 180.0))->capture_default_str();
    tpl_gen->add_option("--saturation", tg.aug.saturation)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    tpl_gen->add_option("--value", tg.aug.value)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    tpl_gen->add_option("--corner-jitter", tg.aug.corner_jitter, "Fraction of card size")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    tpl_gen->add_option("--feather", tg.feather, "Composite splice feather in pixels")
        ->check(CLI::Range(0, 64))
        ->capture_default_str();
    on(tpl_gen, [&] {
        const forge::CardTemplate card = tg.tpl.empty() ? forge::builtin_template() : forge::read_template(tg.tpl);
        const forge::AssetPack assets = forge::read_asset_pack(tg.assets);
        const forge::NameDictionaries names = tg.names.empty() ? forge::builtin_names() : forge::read_names(tg.names);
        forge::ForgeBatchOptions opts;
        opts.out_dir = tg.out;
        opts.count = tg.n;
        opts.image_class = data::parse_class(tg.cls);
        opts.base_seed = g.seed;
        opts.threads = g.threads;
        opts.augment = tg.aug;
        opts.feather = tg.feather;
        const auto result = forge::batch_generate(card, assets, names, opts);

        fs::create_directories(tg.out);
        data::write_manifest(tg.out / "manifest.jsonl", result.manifest);
        std::string identities;
        for (std::size_t i = 0; i < result.identities.size(); ++i) {
            identities += identity_json(result.identities[i], result.manifest[i].path).dump() + '\n';
        }
        data::atomic_write(tg.out / "identities.jsonl", identities);
        std::vector<std::string> failures;
        for (const auto& [item, msg] : result.failures) {
            failures.push_back("item " + std::to_string(item) + ": " + msg);
            spdlog::warn("{}", failures.back());
        }
        o.emit(seeded({{"written", result.manifest.size()},
                       {"manifest", (tg.out / "manifest.jsonl").string()},
                       {"failures", failures_json(failures)}}));
        return failures.empty() ? kOk : kData;
    });

    struct {
        fs::path out;
        std::size_t faces = 20, signatures = 20;
    } tp;
    auto* tpl_ph = tpl->add_subcommand("placeholder", "Write a procedural face/signature asset pack");
    tpl_ph->add_option("--out", tp.out)->required();
    tpl_ph->add_option("--faces", tp.faces)->check(CLI::Range(std::size_t{2}, std::size_t{100000}))->capture_default_str();
    tpl_ph->add_option("--signatures", tp.signatures)
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000}))
        ->capture_default_str();
    on(tpl_ph, [&] {
        const auto pack = forge::generate_placeholder_assets(tp.out, tp.faces, tp.signatures, g.seed);
        o.emit(seeded({{"faces", pack.faces.size()},
                       {"signatures", pack.signatures.size()},
                       {"assets", (tp.out / "assets.json").string()}}));
        return kOk;
    });

    fs::path te_out;
    auto* tpl_export = tpl->add_subcommand("export", "Write the built-in template as template.json + background.png");
    tpl_export->add_option("--out", te_out)->required();
    on(tpl_export, [&] {
        forge::write_template(te_out, forge::builtin_template());
        o.emit({{"template", (te_out / "template.json").string()}});
        return kOk;
    });

    // ---- fid --------------------------------------------------------------
    struct {
        fs::path fa, fb, ia, ib;
        bool smoke = false;
    } fd;
    auto* fid_cmd = app.add_subcommand("fid", "Frechet distance between two feature sets");
    auto* opt_fa = fid_cmd->add_option("--features-a", fd.fa)->check(CLI::ExistingFile);
    auto* opt_fb = fid_cmd->add_option("--features-b", fd.fb)->check(CLI::ExistingFile);
    auto* opt_ia = fid_cmd->add_option("--images-a", fd.ia)->check(CLI::ExistingDirectory);
    auto* opt_ib = fid_cmd->add_option("--images-b", fd.ib)->check(CLI::ExistingDirectory);
    fid_cmd->add_flag("--smoke", fd.smoke, "Use the built-in smoke features (not comparable to Inception FID)");
    opt_fa->needs(opt_fb)->excludes(opt_ia)->excludes(opt_ib);
    opt_fb->needs(opt_fa);
    opt_ia->needs(opt_ib);
    opt_ib->needs(opt_ia);
    on(fid_cmd, [&] {
        fid::FeatureSet a, b;
        if (!fd.fa.empty()) {
            a = fid::read_features(fd.fa);
            b = fid::read_features(fd.fb);
        } else if (!fd.ia.empty()) {
            if (!fd.smoke) throw UsageError("--images-a/--images-b need --smoke");
            spdlog::warn("smoke features are a coarse colour/gradient histogram, not Inception activations");
            a = fid::smoke_features_dir(fd.ia, g.threads);
            b = fid::smoke_features_dir(fd.ib, g.threads);
        } else {
            throw UsageError("give --features-a/--features-b or --images-a/--images-b --smoke");
        }
        const double value = fid::fid(fid::summarize(a, g.threads), fid::summarize(b, g.threads));
        if (g.json) {
            o.emit({{"fid", value}, {"n_a", a.rows.rows()}, {"n_b", b.rows.rows()}, {"dim", a.rows.cols()}});
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.12g", value);
            o.raw() << buf << '\n';
        }
        return kOk;
    });

    struct {
        fs::path images, out;
        bool binary = false;
    } fe;
    auto* features = app.add_subcommand("features", "Extract smoke features from a directory of PNGs");
    features->add_option("--images", fe.images)->required()->check(CLI::ExistingDirectory);
    features->add_option("--out", fe.out)->required();
    features->add_flag("--binary", fe.binary, "Binary float64 matrix instead of text");
    on(features, [&] {
        const auto set = fid::smoke_features_dir(fe.images, g.threads);
        if (fe.out.has_parent_path()) fs::create_directories(fe.out.parent_path());
        fe.binary ? fid::write_features_binary(fe.out, set) : fid::write_features_text(fe.out, set);
        o.emit({{"rows", set.rows.rows()}, {"dim", set.rows.cols()}, {"out", fe.out.string()}});
        return kOk;
    });

    // ---- pad --------------------------------------------------------------
    struct {
        fs::path scores, out, det, svg;
        bool invert = false, log_axes = false;
    } pd;
    auto* pad_cmd = app.add_subcommand("pad", "APCER/BPCER/EER report from detector scores");
    pad_cmd->add_option("--scores", pd.scores, "CSV with header id,label,score")->required()->check(CLI::ExistingFile);
    pad_cmd->add_option("--out", pd.out, "Report JSON")->required();
    pad_cmd->add_option("--det", pd.det, "DET curve CSV");
    pad_cmd->add_option("--svg", pd.svg, "DET curve SVG");
    pad_cmd->add_flag("--invert-scores", pd.invert, "Scores are higher for bona fide");
    pad_cmd->add_flag("--log-axes", pd.log_axes, "Logarithmic SVG axes");
    on(pad_cmd, [&] {
        const pad::EvalSet set(pad::read_scores(pd.scores, pd.invert));
        const auto curve = pad::det_curve(set);
        const auto report = pad::evaluate(curve, set);
        const json j = pad::to_json(report);
        write_text(pd.out, j.dump(2) + "\n");
        if (!pd.det.empty()) {
            std::ostringstream csv;
            pad::write_det_csv(csv, curve);
            write_text(pd.det, csv.str());
        }
        if (!pd.svg.empty()) write_text(pd.svg, pad::det_svg(curve, {pd.log_axes}));
        json summary = {{"worst_pais", j.at("worst_pais")}, {"report", pd.out.string()}};
        for (const auto& [name, s] : j.at("species").items()) summary["eer_" + name] = s.at("eer");
        o.emit(summary);
        return kOk;
    });

    // ---- data -------------------------------------------------------------
    auto* dat = app.add_subcommand("data", "Manifest validation, splitting and mixing")->require_subcommand(1);
    struct {
        fs::path manifest, out;
        bool skip_files = false, allow_leakage = false;
    } dv;
    auto* dvalidate = dat->add_subcommand("validate", "Check paths, duplicates and split leakage");
    dvalidate->add_option("--manifest", dv.manifest)->required()->check(CLI::ExistingFile);
    dvalidate->add_option("--out", dv.out, "Also write the report JSON here");
    dvalidate->add_flag("--skip-files", dv.skip_files, "Do not stat image paths");
    dvalidate->add_flag("--allow-leakage", dv.allow_leakage, "Downgrade split leakage to a warning");
    on(dvalidate, [&] {
        data::ValidateOptions opts;
        opts.check_files = !dv.skip_files;
        opts.allow_leakage = dv.allow_leakage;
        opts.threads = g.threads;
        const auto report = data::validate(data::read_manifest(dv.manifest), opts);
        const json j = data::to_json(report);
        if (!dv.out.empty()) write_text(dv.out, j.dump(2) + "\n");
        if (g.json) {
            o.emit(j);
        } else {
            o.emit({{"rows", report.total}, {"violations", report.violations.size()}, {"warnings", report.warnings.size()}});
            for (const auto& v : report.violations)
                o.raw() << "  " << data::to_string(v.kind) << ' ' << v.path << ' ' << v.detail << '\n';
        }
        return report.ok() ? kOk : kData;
    });

    struct {
        fs::path manifest, out;
        double train = 0.8, val = 0.1, test = 0.1;
    } ds;
    auto* dsplit = dat->add_subcommand("split", "Stratified train/val/test assignment");
    dsplit->add_option("--manifest", ds.manifest)->required()->check(CLI::ExistingFile);
    dsplit->add_option("--out", ds.out)->required();
    dsplit->add_option("--train", ds.train)->capture_default_str();
    dsplit->add_option("--val", ds.val)->capture_default_str();
    dsplit->add_option("--test", ds.test)->capture_default_str();
    on(dsplit, [&] {
        const data::SplitFractions f{ds.train, ds.val, ds.test};
        data::split_counts(0, f);  // rejects bad fractions before anything is read
        const auto rows = data::split(data::read_manifest(ds.manifest), f, g.seed);
        data::write_manifest(ds.out, rows);
        std::array<std::size_t, 3> counts{};
        for (const auto& r : rows) ++counts[static_cast<std::size_t>(r.split)];
        o.emit(seeded({{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}, {"out", ds.out.string()}}));
        return kOk;
    });

    struct {
        fs::path manifest, out_a, out_b;
        std::string split = "train";
    } dh;
    auto* dhalve = dat->add_subcommand("halve", "Stratified halving of one split into two manifests");
    dhalve->add_option("--manifest", dh.manifest)->required()->check(CLI::ExistingFile);
    dhalve->add_option("--split", dh.split)->check(CLI::IsMember({"train", "val", "test"}))->capture_default_str();
    dhalve->add_option("--out-a", dh.out_a)->required();
    dhalve->add_option("--out-b", dh.out_b)->required();
    on(dhalve, [&] {
        const auto [a, b] = data::halve(data::read_manifest(dh.manifest), data::parse_split(dh.split), g.seed);
        data::write_manifest(dh.out_a, a);
        data::write_manifest(dh.out_b, b);
        o.emit(seeded({{"a", a.size()}, {"b", b.size()}}));
        return kOk;
    });

    struct {
        fs::path manifest, out;
        std::vector<std::string> classes;
    } dc;
    auto* dclone = dat->add_subcommand("clone", "Copy the rows of selected classes");
    dclone->add_option("--manifest", dc.manifest)->required()->check(CLI::ExistingFile);
    dclone->add_option("--classes", dc.classes)->required()->delimiter(',')->check(CLI::IsMember(kClassNames));
    dclone->add_option("--out", dc.out)->required();
    on(dclone, [&] {
        std::set<data::ImageClass> classes;
        for (const auto& c : dc.classes) classes.insert(data::parse_class(c));
        const auto rows = data::clone(data::read_manifest(dc.manifest), classes);
        data::write_manifest(dc.out, rows);
        o.emit({{"rows", rows.size()}, {"out", dc.out.string()}});
        return kOk;
    });

    struct {
        std::string recipe;
        fs::path recipe_file, store, out;
        bool dedup = false;
    } dm;
    auto* dmix = dat->add_subcommand("mix", "Assemble a training mix from a manifest store");
    auto* opt_recipe = dmix->add_option("--recipe", dm.recipe, "Built-in recipe name");
    auto* opt_recipe_file = dmix->add_option("--recipe-file", dm.recipe_file)->check(CLI::ExistingFile);
    opt_recipe->excludes(opt_recipe_file);
    dmix->add_option("--store", dm.store, "Directory of <selector>.jsonl manifests")
        ->required()
        ->check(CLI::ExistingDirectory);
    dmix->add_option("--out", dm.out)->required();
    dmix->add_flag("--dedup", dm.dedup, "Drop repeated paths");
    on(dmix, [&] {
        data::MixRecipe recipe;
        if (!dm.recipe_file.empty()) {
            recipe = data::read_recipe(dm.recipe_file);
        } else if (!dm.recipe.empty()) {
            const auto r = data::find_builtin_recipe(dm.recipe);
            if (!r) throw UsageError("unknown recipe '" + dm.recipe + "'; see `idforge data recipes`");
            recipe = *r;
        } else {
            throw UsageError("give --recipe or --recipe-file");
        }
        const auto mix = data::assemble_mix(recipe, data::load_store(dm.store), dm.dedup);
        data::write_manifest(dm.out, mix.rows);
        json sources = json::array();
        for (std::size_t i = 0; i < recipe.sources.size(); ++i)
            sources.push_back({{"selector", recipe.sources[i].selector}, {"rows", mix.source_counts[i]}});
        o.emit({{"recipe", recipe.name}, {"rows", mix.rows.size()}, {"sources", sources}, {"out", dm.out.string()}});
        return kOk;
    });

    auto* drecipes = dat->add_subcommand("recipes", "List the built-in mix recipes");
    on(drecipes, [&] {
        json arr = json::array();
        for (const auto& r : data::builtin_recipes()) arr.push_back(data::to_json(r));
        if (g.json) {
            o.raw() << arr.dump(2) << '\n';
        } else {
            for (const auto& r : data::builtin_recipes()) {
                o.raw() << r.name << ':';
                for (const auto& s : r.sources) o.raw() << ' ' << s.selector;
                o.raw() << '\n';
            }
        }
        return kOk;
    });

    struct {
        fs::path in, out;
    } di;
    auto* dimport = dat->add_subcommand("import-csv", "Convert a CSV manifest to JSON Lines");
    dimport->add_option("--in", di.in)->required()->check(CLI::ExistingFile);
    dimport->add_option("--out", di.out)->required();
    on(dimport, [&] {
        const auto rows = data::import_csv(di.in);
        data::write_manifest(di.out, rows);
        o.emit({{"rows", rows.size()}, {"out", di.out.string()}});
        return kOk;
    });

    // ---- dispatch ---------------------------------------------------------
    auto fail = [&](ExitCode code, std::string_view kind, const std::string& message) {
        if (g.json) {
            err << json{{"error", kind}, {"message", message}, {"exit_code", static_cast<int>(code)}}.dump() << '\n';
        } else {
            err << "idforge: " << message << '\n';
        }
        return static_cast<int>(code);
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        if (g.json) return fail(kUsage, "UsageError", e.what());
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        configure_logging(g.log_level);
        for (const auto& [sub, handler] : handlers) {
            if (!sub->parsed()) continue;
            const int code = handler();
            spdlog::debug("{} finished with exit code {}", sub->get_name(), code);
            return code;
        }
        return fail(kInternal, "Internal", "no handler for the given command");
    } catch (const UsageError& e) {
        return fail(kUsage, "UsageError", e.what());
    } catch (const Error& e) {
        return fail(exit_code_for(e.kind()), to_string(e.kind()), e.what());
    } catch (const std::exception& e) {
        return fail(kInternal, "Internal", e.what());
    }
}

}  // namespace idforge::cli
