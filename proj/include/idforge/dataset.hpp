#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "idforge/manifest.hpp"

namespace idforge::data {

enum class ViolationKind { MissingFile, DuplicatePath, SplitLeakage };
std::string_view to_string(ViolationKind k) noexcept;

struct Violation {
    ViolationKind kind;
    std::string path;
    std::string detail;
};

struct ValidateOptions {
    bool check_files = true;
    // Downgrades split leakage from a violation to a warning.
    bool allow_leakage = false;
    unsigned threads = 1;
};

struct IntegrityReport {
    std::vector<Violation> violations;
    std::vector<Violation> warnings;
    std::map<ImageClass, std::map<Split, std::size_t>> class_split_counts;
    std::map<ImageClass, std::size_t> class_counts;
    std::map<Origin, std::size_t> origin_counts;
    std::size_t total = 0;

    bool ok() const noexcept { return violations.empty(); }
    std::size_t count(ImageClass c, Split s) const;
};

// Read-only: never touches anything but `stat` on the listed paths.
IntegrityReport validate(const Manifest& rows, const ValidateOptions& options = {});
nlohmann::json to_json(const IntegrityReport& report);

// Fractions in train, val, test order.
struct SplitFractions {
    double train = 1.0;
    double val = 0.0;
    double test = 0.0;
};

// Per-class counts by largest remainder; ties go to train, then val, then test.
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitFractions& f);

// Stratified by class; row order is preserved, only `split` changes.
Manifest split(const Manifest& rows, const SplitFractions& fractions, std::uint64_t seed);

// Halves the rows of one split per class; the first half receives the odd row.
std::pair<Manifest, Manifest> halve(const Manifest& rows, Split which, std::uint64_t seed);

// Copy of the rows whose class is in `classes` (all rows when empty).
Manifest clone(const Manifest& rows, const std::set<ImageClass>& classes);

struct MixSource {
    std::string selector;
    std::set<ImageClass> classes;  // empty = every class
};

struct MixRecipe {
    std::string name;
    std::vector<MixSource> sources;
};

struct MixResult {
    Manifest rows;
    std::vector<std::pair<std::string, std::size_t>> source_counts;
};

using ManifestStore = std::map<std::string, Manifest>;

// Concatenation in source order; no deduplication unless asked.
MixResult assemble_mix(const MixRecipe& recipe, const ManifestStore& store, bool dedup = false);

const std::vector<MixRecipe>& builtin_recipes();
std::optional<MixRecipe> find_builtin_recipe(std::string_view name);
MixRecipe recipe_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MixRecipe& recipe);
MixRecipe read_recipe(const std::filesystem::path& path);

// Every `*.jsonl` in `dir`, keyed by file stem.
ManifestStore load_store(const std::filesystem::path& dir);

}  // namespace idforge::data
