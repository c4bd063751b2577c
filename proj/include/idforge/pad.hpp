#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "idforge/manifest.hpp"

namespace idforge::pad {

using data::ImageClass;

// Higher score = more attack-like; a presentation is flagged as an attack when
// score >= threshold.
struct ScoreRecord {
    std::string id;
    ImageClass label = ImageClass::Bonafide;
    double score = 0.0;
};

class EvalSet {
public:
    explicit EvalSet(std::vector<ScoreRecord> records);

    const std::vector<ScoreRecord>& records() const noexcept { return records_; }
    std::size_t n_bf() const noexcept { return n_bf_; }
    std::size_t n_pais(ImageClass species) const;
    // Attack species with at least one record, in enum order.
    std::vector<ImageClass> species() const;

private:
    std::vector<ScoreRecord> records_;
    std::size_t n_bf_ = 0;
    std::map<ImageClass, std::size_t> n_pais_;
};

double apcer(const EvalSet& set, ImageClass species, double threshold);
double bpcer(const EvalSet& set, double threshold);

struct DetPoint {
    double threshold;
    std::map<ImageClass, double> apcer;
    double bpcer;
};

// Thresholds are -inf, every distinct score ascending, +inf. APCER is
// non-decreasing and BPCER non-increasing along the curve.
struct DetCurve {
    std::vector<DetPoint> points;
    std::vector<ImageClass> species;
};

DetCurve det_curve(const EvalSet& set);

struct Rate {
    double value = 0.0;
    // Degenerate EER (no informative point between the extremes) or an
    // unreachable APCER target.
    bool flagged = false;
};

Rate eer(const DetCurve& curve, ImageClass species);
// BPCER at APCER = 1/ap.
Rate bpcer_ap(const DetCurve& curve, ImageClass species, double ap);

struct SpeciesReport {
    std::size_t n = 0;
    Rate eer, bpcer10, bpcer20, bpcer100;
};

struct Report {
    std::size_t n_bf = 0;
    std::map<ImageClass, SpeciesReport> species;
    ImageClass worst_pais = ImageClass::Print;
};

// Maximum EER; ties go to the alphabetically first name.
ImageClass worst_pais(const std::map<ImageClass, SpeciesReport>& species);
Report evaluate(const DetCurve& curve, const EvalSet& set);

nlohmann::json to_json(const Report& report);
void write_det_csv(std::ostream& out, const DetCurve& curve);
struct SvgOptions {
    bool log_axes = false;
    int width = 640;
    int height = 480;
};
std::string det_svg(const DetCurve& curve, const SvgOptions& options = {});

// CSV with header id,label,score.
std::vector<ScoreRecord> parse_scores(std::istream& in, bool invert = false);
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path, bool invert = false);

}  // namespace idforge::pad
