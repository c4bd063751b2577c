#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "idforge/cli.hpp"
#include "idforge/fid.hpp"
#include "idforge/imaging.hpp"
#include "idforge/manifest.hpp"
#include "support.hpp"

using namespace idforge;
using idforge::testing::TempDir;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "idforge");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string line_value(const std::string& out, const std::string& key) {
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);)
        if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
    return {};
}

const std::filesystem::path& assets_json() {
    static TempDir dir("cli-assets");
    static const auto path = [] {
        REQUIRE(run({"template", "placeholder", "--out", dir.path().string(), "--faces", "4", "--signatures", "2"}).code ==
                0);
        return dir.path() / "assets.json";
    }();
    return path;
}

}  // namespace

TEST_CASE("help and usage errors") {
    const Run help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("Usage") != std::string::npos);
    CHECK(run({"pad", "--help"}).code == 0);

    CHECK(run({"--no-such-flag", "palette", "gen", "--out", "x"}).code == 1);
    CHECK(run({"pad", "--no-such-flag"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);

    const Run json_err = run({"--json", "fid", "--features-a", "/nonexistent", "--features-b", "/nonexistent"});
    CHECK(json_err.code == 1);
    const auto j = nlohmann::json::parse(json_err.err);
    CHECK(j.at("exit_code") == 1);

    CHECK(cli::exit_code_for(ErrorKind::InvalidArgument) == cli::kUsage);
    CHECK(cli::exit_code_for(ErrorKind::ParseError) == cli::kData);
    CHECK(cli::exit_code_for(ErrorKind::NotPSD) == cli::kData);
}

TEST_CASE("fid of a feature file against itself is zero") {
    TempDir dir("cli-fid");
    Rng rng(3);
    fid::FeatureSet set;
    set.rows.resize(40, 6);
    for (int i = 0; i < 40; ++i) {
        set.ids.push_back("x" + std::to_string(i));
        for (int c = 0; c < 6; ++c) set.rows(i, c) = rng.uniform(-2, 2);
    }
    const auto path = dir.path() / "a.feat";
    fid::write_features_text(path, set);
    const Run r = run({"fid", "--features-a", path.string(), "--features-b", path.string()});
    REQUIRE(r.code == 0);
    CHECK(std::abs(std::stod(r.out)) <= 1e-8);

    const Run j = run({"--json", "fid", "--features-a", path.string(), "--features-b", path.string()});
    CHECK(std::abs(nlohmann::json::parse(j.out).at("fid").get<double>()) <= 1e-8);

    std::ofstream(dir.path() / "bad.feat") << "garbage\n";
    CHECK(run({"fid", "--features-a", path.string(), "--features-b", (dir.path() / "bad.feat").string()}).code == 2);
    CHECK(run({"fid"}).code == 1);
}

TEST_CASE("seed sources: flag, environment, config file") {
    TempDir dir("cli-seed");
    const auto out = (dir.path() / "a").string();
    CHECK(line_value(run({"template", "placeholder", "--out", out, "--faces", "2", "--signatures", "1"}).out, "seed") ==
          "0");

    ::setenv("IDFORGE_SEED", "77", 1);
    CHECK(line_value(run({"template", "placeholder", "--out", out, "--faces", "2", "--signatures", "1"}).out, "seed") ==
          "77");
    CHECK(line_value(run({"--seed", "5", "template", "placeholder", "--out", out, "--faces", "2", "--signatures", "1"}).out,
                     "seed") == "5");
    ::unsetenv("IDFORGE_SEED");

    const auto cfg = dir.path() / "run.toml";
    std::ofstream(cfg) << "seed = 11\n";
    CHECK(line_value(run({"--config", cfg.string(), "template", "placeholder", "--out", out, "--faces", "2",
                          "--signatures", "1"})
                         .out,
                     "seed") == "11");
    // Flags after the subcommand still reach the global options.
    CHECK(line_value(run({"--config", cfg.string(), "template", "placeholder", "--out", out, "--faces", "2",
                          "--signatures", "1", "--seed", "4"})
                         .out,
                     "seed") == "4");
}

TEST_CASE("template gen is deterministic across runs and thread counts") {
    TempDir dir("cli-gen");
    const auto a = dir.path() / "a", b = dir.path() / "b";
    const auto assets = assets_json().string();
    REQUIRE(run({"--seed", "8", "--threads", "1", "template", "gen", "--assets", assets, "--n", "6", "--class",
                 "composite", "--out", a.string()})
                .code == 0);
    REQUIRE(run({"--seed", "8", "--threads", "3", "template", "gen", "--assets", assets, "--n", "6", "--class",
                 "composite", "--out", b.string()})
                .code == 0);
    for (const auto& img : list_images(a)) CHECK(slurp(img) == slurp(b / img.filename()));
    CHECK(slurp(a / "identities.jsonl").size() > 0);
    const auto rows = data::read_manifest(a / "manifest.jsonl");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].image_class == data::ImageClass::Composite);

    // Flag validation happens before anything is written.
    const auto c = dir.path() / "c";
    CHECK(run({"template", "gen", "--assets", assets, "--n", "2", "--hue", "400", "--out", c.string()}).code == 1);
    CHECK_FALSE(std::filesystem::exists(c));
    CHECK(run({"template", "gen", "--assets", assets, "--n", "2", "--class", "print", "--out", c.string()}).code == 1);
    CHECK_FALSE(std::filesystem::exists(c));
}

TEST_CASE("data commands leave their inputs untouched") {
    TempDir dir("cli-data");
    data::Manifest rows;
    for (int i = 0; i < 40; ++i)
        rows.push_back({"img" + std::to_string(i) + ".png", i % 2 ? data::ImageClass::Print : data::ImageClass::Bonafide,
                        data::Origin::Captured, data::Split::Train, std::nullopt});
    const auto in = dir.path() / "in.jsonl";
    data::write_manifest(in, rows);
    const std::string before = slurp(in);

    const auto split = dir.path() / "split.jsonl";
    const Run s = run({"--seed", "2", "data", "split", "--manifest", in.string(), "--out", split.string(), "--train",
                       "0.5", "--val", "0.25", "--test", "0.25"});
    REQUIRE(s.code == 0);
    CHECK(line_value(s.out, "train") == "20");
    CHECK(run({"data", "split", "--manifest", in.string(), "--out", split.string(), "--train", "0.9"}).code == 1);

    CHECK(run({"data", "validate", "--manifest", split.string(), "--skip-files"}).code == 0);
    CHECK(run({"data", "validate", "--manifest", split.string()}).code == 2);

    const auto a = dir.path() / "a.jsonl", b = dir.path() / "b.jsonl";
    CHECK(run({"data", "halve", "--manifest", in.string(), "--out-a", a.string(), "--out-b", b.string()}).code == 0);
    CHECK(data::read_manifest(a).size() == 20);

    const auto store = dir.path() / "store";
    std::filesystem::create_directories(store);
    data::write_manifest(store / "chl-a.jsonl", rows);
    data::write_manifest(store / "chl-b.jsonl", rows);
    const auto mix = dir.path() / "mix.jsonl";
    const Run m = run({"data", "mix", "--recipe", "source-captured", "--store", store.string(), "--out", mix.string()});
    REQUIRE(m.code == 0);
    CHECK(line_value(m.out, "rows") == "80");
    CHECK(run({"data", "mix", "--recipe", "source-templates", "--store", store.string(), "--out", mix.string()}).code ==
          2);
    CHECK(run({"data", "mix", "--recipe", "nope", "--store", store.string(), "--out", mix.string()}).code == 1);

    const auto clone = dir.path() / "clone.jsonl";
    CHECK(run({"data", "clone", "--manifest", in.string(), "--classes", "print", "--out", clone.string()}).code == 0);
    CHECK(data::read_manifest(clone).size() == 20);
    CHECK(run({"data", "recipes"}).code == 0);

    CHECK(slurp(in) == before);
}

TEST_CASE("pad writes report, DET CSV and SVG") {
    TempDir dir("cli-pad");
    const auto scores = dir.path() / "s.csv";
    {
        std::ofstream f(scores);
        f << "id,label,score\n";
        Rng rng(4);
        for (int i = 0; i < 200; ++i) f << "b" << i << ",bonafide," << rng.uniform(0, 0.6) << '\n';
        for (int i = 0; i < 100; ++i) f << "p" << i << ",print," << rng.uniform(0.3, 1) << '\n';
    }
    const auto out = dir.path() / "r.json", det = dir.path() / "d.csv", svg = dir.path() / "d.svg";
    const Run r = run({"pad", "--scores", scores.string(), "--out", out.string(), "--det", det.string(), "--svg",
                       svg.string(), "--log-axes"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j.at("worst_pais") == "print");
    CHECK(slurp(det).rfind("threshold,species,apcer,bpcer\n", 0) == 0);
    CHECK(slurp(svg).find("<svg") != std::string::npos);

    std::ofstream(dir.path() / "nobf.csv") << "id,label,score\np1,print,0.5\n";
    CHECK(run({"pad", "--scores", (dir.path() / "nobf.csv").string(), "--out", out.string()}).code == 2);
}
