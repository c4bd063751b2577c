#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "idforge/dataset.hpp"
#include "idforge/error.hpp"
#include "idforge/parallel.hpp"
#include "idforge/rng.hpp"

namespace idforge::data {

namespace {

constexpr std::array<ImageClass, 4> kClasses{ImageClass::Bonafide, ImageClass::Composite, ImageClass::Print,
                                             ImageClass::Screen};
constexpr std::array<Split, 3> kSplits{Split::Train, Split::Val, Split::Test};

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

// Row indices per class, in manifest order.
std::map<ImageClass, std::vector<std::size_t>> by_class(const Manifest& rows) {
    std::map<ImageClass, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < rows.size(); ++i) out[rows[i].image_class].push_back(i);
    return out;
}

std::uint64_t class_stream(ImageClass c) { return static_cast<std::uint64_t>(c) + 1; }

}  // namespace

std::string_view to_string(ViolationKind k) noexcept {
    switch (k) {
        case ViolationKind::MissingFile: return "missing_file";
        case ViolationKind::DuplicatePath: return "duplicate_path";
        case ViolationKind::SplitLeakage: return "split_leakage";
    }
    return "?";
}

std::size_t IntegrityReport::count(ImageClass c, Split s) const {
    const auto it = class_split_counts.find(c);
    if (it == class_split_counts.end()) return 0;
    const auto jt = it->second.find(s);
    return jt == it->second.end() ? 0 : jt->second;
}

IntegrityReport validate(const Manifest& rows, const ValidateOptions& options) {
    IntegrityReport report;
    report.total = rows.size();
    for (const auto& r : rows) {
        ++report.class_split_counts[r.image_class][r.split];
        ++report.class_counts[r.image_class];
        ++report.origin_counts[r.origin];
    }

    std::unordered_map<std::string, std::vector<std::size_t>> seen;
    for (std::size_t i = 0; i < rows.size(); ++i) seen[rows[i].path].push_back(i);
    std::vector<std::string> paths;
    for (const auto& [path, idx] : seen)
        if (idx.size() > 1) paths.push_back(path);
    std::sort(paths.begin(), paths.end());
    for (const auto& path : paths) {
        const auto& idx = seen[path];
        std::set<Split> splits;
        for (auto i : idx) splits.insert(rows[i].split);
        if (splits.size() > 1) {
            std::string detail = "appears in";
            for (Split s : splits) detail += " " + std::string(to_string(s));
            Violation v{ViolationKind::SplitLeakage, path, detail};
            (options.allow_leakage ? report.warnings : report.violations).push_back(std::move(v));
        } else {
            report.violations.push_back(
                {ViolationKind::DuplicatePath, path, "listed " + std::to_string(idx.size()) + " times"});
        }
    }

    if (options.check_files) {
        std::vector<char> missing(rows.size(), 0);
        parallel_for(rows.size(), std::max(1u, options.threads), [&](std::size_t i) {
            std::error_code ec;
            missing[i] = !std::filesystem::is_regular_file(rows[i].path, ec);
        });
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (missing[i]) {
                report.violations.push_back(
                    {ViolationKind::MissingFile, rows[i].path, "row " + std::to_string(i + 1)});
            }
        }
    }
    return report;
}

nlohmann::json to_json(const IntegrityReport& report) {
    auto violations = [](const std::vector<Violation>& vs) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& v : vs) arr.push_back({{"kind", to_string(v.kind)}, {"path", v.path}, {"detail", v.detail}});
        return arr;
    };
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [c, splits] : report.class_split_counts) {
        nlohmann::json row = nlohmann::json::object();
        std::size_t total = 0;
        for (const auto& [s, n] : splits) {
            row[std::string(to_string(s))] = n;
            total += n;
        }
        row["total"] = total;
        classes[std::string(to_string(c))] = row;
    }
    nlohmann::json origins = nlohmann::json::object();
    for (const auto& [o, n] : report.origin_counts) origins[std::string(to_string(o))] = n;
    return {{"ok", report.ok()},
            {"total", report.total},
            {"classes", classes},
            {"origins", origins},
            {"violations", violations(report.violations)},
            {"warnings", violations(report.warnings)}};
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitFractions& f) {
    const std::array<double, 3> fr{f.train, f.val, f.test};
    double sum = 0.0;
    for (double x : fr) {
        if (!std::isfinite(x) || x < 0.0) throw Error(ErrorKind::BadFractions, "fractions must be finite and >= 0");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorKind::BadFractions, "fractions sum to " + std::to_string(sum) + ", expected 1");
    }
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        const double exact = static_cast<double>(n) * fr[k];
        counts[k] = std::min(n, static_cast<std::size_t>(std::floor(exact)));
        rem[k] = exact - static_cast<double>(counts[k]);
        assigned += counts[k];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
    for (int k = 0; assigned < n; k = (k + 1) % 3, ++assigned) ++counts[order[k]];
    while (assigned > n) {  // only reachable through rounding in `floor`
        for (int k = 2; k >= 0 && assigned > n; --k)
            if (counts[order[k]] > 0) --counts[order[k]], --assigned;
    }
    return counts;
}

Manifest split(const Manifest& rows, const SplitFractions& fractions, std::uint64_t seed) {
    split_counts(0, fractions);  // validates
    Manifest out = rows;
    for (auto& [cls, idx] : by_class(rows)) {
        Rng rng(mix_seed(seed, class_stream(cls)));
        shuffle(idx, rng);
        const auto counts = split_counts(idx.size(), fractions);
        std::size_t pos = 0;
        for (int k = 0; k < 3; ++k)
            for (std::size_t j = 0; j < counts[k]; ++j) out[idx[pos++]].split = kSplits[k];
    }
    return out;
}

std::pair<Manifest, Manifest> halve(const Manifest& rows, Split which, std::uint64_t seed) {
    std::vector<char> first(rows.size(), 0), second(rows.size(), 0);
    for (auto& [cls, idx] : by_class(rows)) {
        std::erase_if(idx, [&](std::size_t i) { return rows[i].split != which; });
        Rng rng(mix_seed(seed, class_stream(cls)));
        shuffle(idx, rng);
        const std::size_t a = (idx.size() + 1) / 2;
        for (std::size_t j = 0; j < idx.size(); ++j) (j < a ? first : second)[idx[j]] = 1;
    }
    std::pair<Manifest, Manifest> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (first[i]) out.first.push_back(rows[i]);
        if (second[i]) out.second.push_back(rows[i]);
    }
    return out;
}

Manifest clone(const Manifest& rows, const std::set<ImageClass>& classes) {
    Manifest out;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
                 [&](const ManifestRow& r) { return classes.empty() || classes.count(r.image_class); });
    return out;
}

MixResult assemble_mix(const MixRecipe& recipe, const ManifestStore& store, bool dedup) {
    if (recipe.sources.empty()) throw Error(ErrorKind::UnresolvedSelector, "recipe '" + recipe.name + "' has no sources");
    // Resolve everything before producing output.
    std::vector<Manifest> resolved;
    for (const auto& src : recipe.sources) {
        const auto it = store.find(src.selector);
        if (it == store.end()) {
            throw Error(ErrorKind::UnresolvedSelector, "recipe '" + recipe.name + "': no manifest named '" + src.selector + "'");
        }
        Manifest rows = clone(it->second, src.classes);
        if (rows.empty()) {
            throw Error(ErrorKind::UnresolvedSelector,
                        "recipe '" + recipe.name + "': selector '" + src.selector + "' matches no rows");
        }
        resolved.push_back(std::move(rows));
    }

    MixResult result;
    std::set<std::string> taken;
    for (std::size_t k = 0; k < resolved.size(); ++k) {
        std::size_t added = 0;
        for (auto& row : resolved[k]) {
            if (dedup && !taken.insert(row.path).second) continue;
            result.rows.push_back(std::move(row));
            ++added;
        }
        result.source_counts.emplace_back(recipe.sources[k].selector, added);
    }
    return result;
}

const std::vector<MixRecipe>& builtin_recipes() {
    static const std::vector<MixRecipe> recipes = [] {
        const std::set<ImageClass> composite{ImageClass::Bonafide, ImageClass::Composite};
        const std::set<ImageClass> source{ImageClass::Bonafide, ImageClass::Print, ImageClass::Screen};
        auto make = [](std::string name, const std::set<ImageClass>& classes, std::vector<std::string> selectors) {
            MixRecipe r{std::move(name), {}};
            for (auto& s : selectors) r.sources.push_back({std::move(s), classes});
            return r;
        };
        // Synthetic-attack mixes keep Chl-A for bona fide/attack captures; the
        // CycleGAN and Textures bases reuse Chl-B bona fide under the name chl-c.
        return std::vector<MixRecipe>{
            make("composite-captured", composite, {"chl-a", "chl-b"}),
            make("composite-stylegan2", composite, {"chl-a", "stylegan2"}),
            make("composite-templates", composite, {"chl-a", "templates"}),
            make("composite-combined", composite, {"chl-a", "stylegan2", "templates"}),
            make("source-captured", source, {"chl-a", "chl-b"}),
            make("source-stylegan2", source, {"chl-a", "stylegan2"}),
            make("source-templates", source, {"chl-a", "templates"}),
            make("source-cyclegan", source, {"chl-a", "chl-c", "cyclegan"}),
            make("source-textures", source, {"chl-a", "chl-c", "textures"}),
            make("source-combined", source,
                 {"chl-a", "chl-c", "chl-c", "stylegan2", "cyclegan", "templates", "textures"}),
        };
    }();
    return recipes;
}

std::optional<MixRecipe> find_builtin_recipe(std::string_view name) {
    for (const auto& r : builtin_recipes())
        if (r.name == name) return r;
    return std::nullopt;
}

MixRecipe recipe_from_json(const nlohmann::json& j) {
    try {
        MixRecipe r;
        r.name = j.at("name").get<std::string>();
        for (const auto& s : j.at("sources")) {
            MixSource src;
            src.selector = s.at("selector").get<std::string>();
            if (s.contains("classes"))
                for (const auto& c : s.at("classes")) src.classes.insert(parse_class(c.get<std::string>()));
            r.sources.push_back(std::move(src));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("recipe: ") + e.what());
    }
}

nlohmann::json to_json(const MixRecipe& recipe) {
    nlohmann::json sources = nlohmann::json::array();
    for (const auto& s : recipe.sources) {
        nlohmann::json classes = nlohmann::json::array();
        for (auto c : s.classes) classes.push_back(to_string(c));
        sources.push_back({{"selector", s.selector}, {"classes", classes}});
    }
    return {{"name", recipe.name}, {"sources", sources}};
}

MixRecipe read_recipe(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    try {
        return recipe_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
}

ManifestStore load_store(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorKind::IoError, dir.string() + " is not a directory");
    ManifestStore store;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            store[entry.path().stem().string()] = read_manifest(entry.path());
        }
    }
    return store;
}

}  // namespace idforge::data
