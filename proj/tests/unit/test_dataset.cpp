#include <doctest.h>

#include <fstream>
#include <sstream>

#include "idforge/dataset.hpp"
#include "idforge/error.hpp"
#include "idforge/rng.hpp"
#include "support.hpp"
#include "tables.hpp"

using namespace idforge;
using namespace idforge::data;
using idforge::testing::TempDir;

TEST_CASE("enum names are exact") {
    CHECK(parse_class("bonafide") == ImageClass::Bonafide);
    CHECK(parse_origin("stylegan2") == Origin::StyleGan2);
    CHECK(parse_split("val") == Split::Val);
    CHECK_THROWS_WITH_AS(parse_class("Bonafide"), doctest::Contains("ParseError"), Error);
    CHECK_THROWS_AS(parse_origin("StyleGAN2"), Error);
    CHECK_THROWS_AS(parse_split("validation"), Error);
}

TEST_CASE("manifest JSONL round trip") {
    const Manifest rows{{"a.png", ImageClass::Print, Origin::Textures, Split::Test, 17},
                        {"dir/b c.png", ImageClass::Bonafide, Origin::Captured, Split::Val, std::nullopt}};
    std::stringstream ss;
    write_manifest_stream(ss, rows);
    CHECK(parse_manifest(ss) == rows);

    std::istringstream bad("{\"path\":\"x\",\"class\":\"print\",\"origin\":\"captured\",\"split\":\"train\"}\n"
                           "\n"
                           "{\"path\":\"y\",\"class\":\"printed\",\"origin\":\"captured\",\"split\":\"train\"}\n");
    CHECK_THROWS_WITH_AS(parse_manifest(bad), doctest::Contains("line 3"), Error);
    std::istringstream garbage("not json\n");
    CHECK_THROWS_AS(parse_manifest(garbage), Error);

    TempDir dir("manifest");
    write_manifest(dir.path() / "m.jsonl", rows);
    CHECK(read_manifest(dir.path() / "m.jsonl") == rows);

    std::ofstream(dir.path() / "m.csv") << "path,class,origin,split,seed\na.png,print,textures,test,17\n"
                                           "dir/b c.png,bonafide,captured,val,\n";
    CHECK(import_csv(dir.path() / "m.csv") == rows);
    std::ofstream(dir.path() / "bad.csv") << "path,kind\nx,y\n";
    CHECK_THROWS_AS(import_csv(dir.path() / "bad.csv"), Error);
}

TEST_CASE("validate reports violations and counts") {
    TempDir dir("validate");
    std::ofstream(dir.path() / "a.png") << "x";
    std::ofstream(dir.path() / "b.png") << "x";
    const std::string a = (dir.path() / "a.png").string(), b = (dir.path() / "b.png").string();

    Manifest good{{a, ImageClass::Bonafide, Origin::Captured, Split::Train, {}},
                  {b, ImageClass::Print, Origin::Textures, Split::Test, {}}};
    const auto ok = validate(good);
    CHECK(ok.ok());
    CHECK(ok.warnings.empty());
    CHECK(ok.class_counts.at(ImageClass::Print) == 1);

    Manifest leaky = good;
    leaky.push_back({a, ImageClass::Bonafide, Origin::Captured, Split::Test, {}});
    const auto leak = validate(leaky);
    REQUIRE(leak.violations.size() == 1);
    CHECK(leak.violations[0].kind == ViolationKind::SplitLeakage);
    const auto warned = validate(leaky, {.check_files = true, .allow_leakage = true});
    CHECK(warned.ok());
    CHECK(warned.warnings.size() == 1);

    Manifest dup = good;
    dup.push_back(good[1]);
    dup.push_back({(dir.path() / "missing.png").string(), ImageClass::Screen, Origin::Captured, Split::Val, {}});
    const auto bad = validate(dup, {.check_files = true, .allow_leakage = false, .threads = 3});
    REQUIRE(bad.violations.size() == 2);
    CHECK(bad.violations[0].kind == ViolationKind::DuplicatePath);
    CHECK(bad.violations[1].kind == ViolationKind::MissingFile);

    // Idempotent and read-only.
    const auto again = validate(dup, {.check_files = true, .allow_leakage = false, .threads = 3});
    CHECK(to_json(again) == to_json(bad));
    CHECK(std::distance(std::filesystem::directory_iterator(dir.path()), {}) == 2);
}

TEST_CASE("captured partitions reproduce the reference totals") {
    const Manifest m = idforge::testing::captured_partitions();
    const auto r = validate(m, {.check_files = false});
    CHECK(r.ok());
    CHECK(r.total == 38477);
    CHECK(r.class_counts.at(ImageClass::Bonafide) == 9286);
    CHECK(r.class_counts.at(ImageClass::Composite) == 10080);
    CHECK(r.class_counts.at(ImageClass::Print) == 11514);
    CHECK(r.class_counts.at(ImageClass::Screen) == 7597);
    CHECK(r.count(ImageClass::Screen, Split::Val) == 1517);
}

TEST_CASE("split_counts uses largest remainder") {
    CHECK(split_counts(10, {1, 0, 0}) == std::array<std::size_t, 3>{10, 0, 0});
    CHECK(split_counts(10, {0.7, 0.15, 0.15}) == std::array<std::size_t, 3>{7, 2, 1});
    CHECK(split_counts(3, {1.0 / 3, 1.0 / 3, 1.0 / 3}) == std::array<std::size_t, 3>{1, 1, 1});
    CHECK(split_counts(0, {0.5, 0.5, 0}) == std::array<std::size_t, 3>{0, 0, 0});
    CHECK_THROWS_WITH_AS(split_counts(5, {0.5, 0.5, 0.1}), doctest::Contains("BadFractions"), Error);
    CHECK_THROWS_AS(split_counts(5, {1.5, -0.5, 0}), Error);
    CHECK_THROWS_AS(split({}, {0.2, 0.2, 0.2}, 0), Error);
}

TEST_CASE("split is a stratified, deterministic partition") {
    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        Manifest m;
        for (int c = 0; c < 4; ++c)
            idforge::testing::append(m, idforge::testing::rows_of("t" + std::to_string(trial), static_cast<ImageClass>(c),
                                                                  Origin::Captured, Split::Train,
                                                                  static_cast<std::size_t>(rng.uniform_int(0, 300))));
        const double tr = rng.uniform(), va = rng.uniform() * (1 - tr);
        const SplitFractions f{tr, va, 1 - tr - va};
        const std::uint64_t seed = rng.next_u64();
        const Manifest s = split(m, f, seed);
        REQUIRE(s.size() == m.size());
        CHECK(s == split(m, f, seed));
        for (std::size_t i = 0; i < m.size(); ++i) {
            REQUIRE(s[i].path == m[i].path);
            REQUIRE(s[i].image_class == m[i].image_class);
        }
        const auto r = validate(s, {.check_files = false});
        for (int c = 0; c < 4; ++c) {
            const auto cls = static_cast<ImageClass>(c);
            const double n = static_cast<double>(r.count(cls, Split::Train) + r.count(cls, Split::Val) +
                                                 r.count(cls, Split::Test));
            CHECK(std::abs(static_cast<double>(r.count(cls, Split::Train)) - n * f.train) < 1.0 + 1e-9);
            CHECK(std::abs(static_cast<double>(r.count(cls, Split::Val)) - n * f.val) < 1.0 + 1e-9);
            CHECK(std::abs(static_cast<double>(r.count(cls, Split::Test)) - n * f.test) < 1.0 + 1e-9);
        }
    }
    const Manifest m = idforge::testing::rows_of("x", ImageClass::Print, Origin::Captured, Split::Test, 50);
    for (const auto& row : split(m, {1, 0, 0}, 3)) CHECK(row.split == Split::Train);
    CHECK(split(m, {0.5, 0.5, 0}, 3) != split(m, {0.5, 0.5, 0}, 4));
}

TEST_CASE("halve gives the first half the odd row per class") {
    const auto [a, b] = halve(idforge::testing::captured_partitions(), Split::Train, 11);
    const auto ra = validate(a, {.check_files = false}), rb = validate(b, {.check_files = false});
    CHECK(ra.class_counts.at(ImageClass::Bonafide) == 2807);
    CHECK(rb.class_counts.at(ImageClass::Bonafide) == 2806);
    CHECK(ra.class_counts.at(ImageClass::Composite) == 3126);
    CHECK(rb.class_counts.at(ImageClass::Composite) == 3125);
    CHECK(ra.class_counts.at(ImageClass::Print) == 3447);
    CHECK(rb.class_counts.at(ImageClass::Print) == 3446);
    CHECK(ra.class_counts.at(ImageClass::Screen) == 2271);
    CHECK(rb.class_counts.at(ImageClass::Screen) == 2271);
    Manifest both = a;
    idforge::testing::append(both, b);
    CHECK(validate(both, {.check_files = false}).ok());
    CHECK(halve(idforge::testing::captured_partitions(), Split::Train, 11) == std::pair{a, b});
}

TEST_CASE("clone filters by class") {
    const auto store = idforge::testing::training_store();
    CHECK(store.at("chl-c").size() == 2806);
    CHECK(clone(store.at("chl-a"), {}).size() == store.at("chl-a").size());
}

TEST_CASE("builtin mixes reproduce the reference totals") {
    const auto store = idforge::testing::training_store();
    const std::pair<const char*, std::size_t> expected[] = {
        {"composite-captured", 11864}, {"composite-stylegan2", 11933}, {"composite-templates", 12141},
        {"composite-combined", 18141}, {"source-captured", 17048},     {"source-stylegan2", 17525},
        {"source-templates", 17837},   {"source-cyclegan", 16943},     {"source-textures", 16943},
        {"source-combined", 43673}};
    for (const auto& [name, total] : expected) {
        CAPTURE(name);
        const auto recipe = find_builtin_recipe(name);
        REQUIRE(recipe);
        const MixResult mix = assemble_mix(*recipe, store);
        CHECK(mix.rows.size() == total);
        std::size_t sum = 0;
        for (const auto& [sel, n] : mix.source_counts) sum += n;
        CHECK(sum == mix.rows.size());
    }
    CHECK(builtin_recipes().size() == 10);
}

TEST_CASE("assemble_mix errors, dedup and recipe files") {
    ManifestStore store = idforge::testing::training_store();
    const MixRecipe missing{"m", {{"nope", {}}}};
    CHECK_THROWS_WITH_AS(assemble_mix(missing, store), doctest::Contains("UnresolvedSelector"), Error);
    const MixRecipe empty_filter{"m", {{"cyclegan", {ImageClass::Composite}}}};
    CHECK_THROWS_AS(assemble_mix(empty_filter, store), Error);
    CHECK_THROWS_AS(assemble_mix({"m", {}}, store), Error);

    const MixRecipe twice{"t", {{"chl-c", {}}, {"chl-c", {}}}};
    CHECK(assemble_mix(twice, store).rows.size() == 2 * 2806);
    CHECK(assemble_mix(twice, store, true).rows.size() == 2806);

    // Provenance is kept on every row.
    const auto mix = assemble_mix(*find_builtin_recipe("source-textures"), store);
    CHECK(std::count_if(mix.rows.begin(), mix.rows.end(), [](auto& r) { return r.origin == Origin::Textures; }) == 5612);

    TempDir dir("recipe");
    const auto recipe = *find_builtin_recipe("composite-combined");
    std::ofstream(dir.path() / "r.json") << to_json(recipe).dump();
    const MixRecipe back = read_recipe(dir.path() / "r.json");
    CHECK(back.name == recipe.name);
    CHECK(assemble_mix(back, store).rows.size() == 18141);
    std::ofstream(dir.path() / "bad.json") << "{\"name\": 1}";
    CHECK_THROWS_AS(read_recipe(dir.path() / "bad.json"), Error);

    write_manifest(dir.path() / "chl-a.jsonl", store.at("chl-a"));
    const auto loaded = load_store(dir.path());
    REQUIRE(loaded.count("chl-a"));
    CHECK(loaded.at("chl-a") == store.at("chl-a"));
}
