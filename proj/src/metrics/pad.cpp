#include "idforge/pad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "idforge/error.hpp"

namespace idforge::pad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t species_slot(ImageClass c) { return static_cast<std::size_t>(c); }

}  // namespace

EvalSet::EvalSet(std::vector<ScoreRecord> records) : records_(std::move(records)) {
    for (const auto& r : records_) {
        if (!std::isfinite(r.score)) throw Error(ErrorKind::InvalidArgument, "score for '" + r.id + "' is not finite");
        if (r.label == ImageClass::Bonafide) {
            ++n_bf_;
        } else {
            ++n_pais_[r.label];
        }
    }
}

std::size_t EvalSet::n_pais(ImageClass species) const {
    const auto it = n_pais_.find(species);
    return it == n_pais_.end() ? 0 : it->second;
}

std::vector<ImageClass> EvalSet::species() const {
    std::vector<ImageClass> out;
    for (const auto& [s, n] : n_pais_)
        if (n > 0) out.push_back(s);
    return out;
}

double apcer(const EvalSet& set, ImageClass species, double threshold) {
    const std::size_t n = species == ImageClass::Bonafide ? 0 : set.n_pais(species);
    if (n == 0) throw Error(ErrorKind::EmptySpecies, "no records for species " + std::string(data::to_string(species)));
    std::size_t missed = 0;
    for (const auto& r : set.records())
        if (r.label == species && r.score < threshold) ++missed;
    return static_cast<double>(missed) / static_cast<double>(n);
}

double bpcer(const EvalSet& set, double threshold) {
    if (set.n_bf() == 0) throw Error(ErrorKind::NoBonaFide, "no bona fide records");
    std::size_t flagged = 0;
    for (const auto& r : set.records())
        if (r.label == ImageClass::Bonafide && r.score >= threshold) ++flagged;
    return static_cast<double>(flagged) / static_cast<double>(set.n_bf());
}

DetCurve det_curve(const EvalSet& set) {
    if (set.n_bf() == 0) throw Error(ErrorKind::NoBonaFide, "no bona fide records");
    DetCurve curve;
    curve.species = set.species();
    if (curve.species.empty()) throw Error(ErrorKind::EmptySpecies, "no attack records");

    std::vector<std::pair<double, ImageClass>> sorted;
    sorted.reserve(set.records().size());
    for (const auto& r : set.records()) sorted.emplace_back(r.score, r.label);
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    // below[c] = records of class c with score < current threshold.
    std::array<std::size_t, 4> below{};
    std::array<std::size_t, 4> total{};
    total[species_slot(ImageClass::Bonafide)] = set.n_bf();
    for (auto s : curve.species) total[species_slot(s)] = set.n_pais(s);

    auto emit = [&](double threshold) {
        DetPoint p{threshold, {}, 0.0};
        for (auto s : curve.species) {
            p.apcer[s] = static_cast<double>(below[species_slot(s)]) / static_cast<double>(total[species_slot(s)]);
        }
        const std::size_t bf = species_slot(ImageClass::Bonafide);
        p.bpcer = static_cast<double>(total[bf] - below[bf]) / static_cast<double>(total[bf]);
        curve.points.push_back(std::move(p));
    };

    emit(-kInf);
    for (std::size_t i = 0; i < sorted.size();) {
        const double t = sorted[i].first;
        emit(t);
        for (; i < sorted.size() && sorted[i].first == t; ++i) ++below[species_slot(sorted[i].second)];
    }
    emit(kInf);
    return curve;
}

Rate eer(const DetCurve& curve, ImageClass species) {
    if (std::find(curve.species.begin(), curve.species.end(), species) == curve.species.end()) {
        throw Error(ErrorKind::EmptySpecies, "species " + std::string(data::to_string(species)) + " not in curve");
    }
    const auto& pts = curve.points;
    auto diff = [&](std::size_t k) { return pts[k].apcer.at(species) - pts[k].bpcer; };
    std::size_t k = 0;
    while (k < pts.size() && diff(k) < 0) ++k;
    if (k == pts.size()) return {1.0, true};  // unreachable with the +inf sentinel
    if (diff(k) == 0 || k == 0) return {pts[k].apcer.at(species), false};

    const double a0 = pts[k - 1].apcer.at(species), a1 = pts[k].apcer.at(species);
    const double d0 = diff(k - 1), d1 = diff(k);
    const double alpha = -d0 / (d1 - d0);
    const double value = a0 + alpha * (a1 - a0);
    // Nothing between "everything flagged" and "nothing flagged".
    const bool degenerate = a0 == 0.0 && pts[k - 1].bpcer == 1.0 && a1 == 1.0 && pts[k].bpcer == 0.0;
    return {value, degenerate};
}

Rate bpcer_ap(const DetCurve& curve, ImageClass species, double ap) {
    if (!(ap >= 1.0)) throw Error(ErrorKind::InvalidArgument, "AP must be >= 1");
    if (std::find(curve.species.begin(), curve.species.end(), species) == curve.species.end()) {
        throw Error(ErrorKind::EmptySpecies, "species " + std::string(data::to_string(species)) + " not in curve");
    }
    const double target = 1.0 / ap;
    const auto& pts = curve.points;
    // APCER is non-decreasing, so the admissible points form a prefix; its last
    // element has the smallest BPCER.
    std::size_t last = pts.size();
    for (std::size_t k = 0; k < pts.size() && pts[k].apcer.at(species) <= target; ++k) last = k;
    if (last == pts.size()) return {1.0, true};

    const double a0 = pts[last].apcer.at(species), b0 = pts[last].bpcer;
    if (a0 == target || last + 1 == pts.size()) return {b0, false};
    const double a1 = pts[last + 1].apcer.at(species), b1 = pts[last + 1].bpcer;
    return {b0 + (target - a0) / (a1 - a0) * (b1 - b0), false};
}

ImageClass worst_pais(const std::map<ImageClass, SpeciesReport>& species) {
    if (species.empty()) throw Error(ErrorKind::EmptySpecies, "no species evaluated");
    const std::pair<const ImageClass, SpeciesReport>* best = nullptr;
    for (const auto& entry : species) {
        if (!best || entry.second.eer.value > best->second.eer.value ||
            (entry.second.eer.value == best->second.eer.value &&
             data::to_string(entry.first) < data::to_string(best->first))) {
            best = &entry;
        }
    }
    return best->first;
}

Report evaluate(const DetCurve& curve, const EvalSet& set) {
    Report report;
    report.n_bf = set.n_bf();
    for (auto s : curve.species) {
        SpeciesReport r;
        r.n = set.n_pais(s);
        r.eer = eer(curve, s);
        r.bpcer10 = bpcer_ap(curve, s, 10);
        r.bpcer20 = bpcer_ap(curve, s, 20);
        r.bpcer100 = bpcer_ap(curve, s, 100);
        report.species[s] = r;
    }
    report.worst_pais = worst_pais(report.species);
    return report;
}

nlohmann::json to_json(const Report& report) {
    nlohmann::json species = nlohmann::json::object();
    nlohmann::json counts = {{"bonafide", report.n_bf}};
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& [s, r] : report.species) {
        const std::string name(data::to_string(s));
        species[name] = {{"eer", r.eer.value},
                         {"bpcer10", r.bpcer10.value},
                         {"bpcer20", r.bpcer20.value},
                         {"bpcer100", r.bpcer100.value}};
        counts[name] = r.n;
        if (r.eer.flagged) flags.push_back(name + ":eer_degenerate");
        for (auto [label, rate] : {std::pair{"bpcer10", r.bpcer10}, {"bpcer20", r.bpcer20}, {"bpcer100", r.bpcer100}})
            if (rate.flagged) flags.push_back(name + ":" + label + "_unreachable");
    }
    return {{"species", species},
            {"worst_pais", data::to_string(report.worst_pais)},
            {"counts", counts},
            {"flags", flags},
            {"score_convention", "higher is more attack-like; attack if score >= threshold"}};
}

void write_det_csv(std::ostream& out, const DetCurve& curve) {
    out << "threshold,species,apcer,bpcer\n";
    for (const auto& p : curve.points)
        for (auto s : curve.species)
            out << fmt(p.threshold) << ',' << data::to_string(s) << ',' << fmt(p.apcer.at(s)) << ',' << fmt(p.bpcer)
                << '\n';
}

std::string det_svg(const DetCurve& curve, const SvgOptions& options) {
    constexpr int kMargin = 60;
    constexpr double kLogFloor = 1e-4;
    const double pw = options.width - 2 * kMargin, ph = options.height - 2 * kMargin;
    auto axis = [&](double r) {
        if (!options.log_axes) return r;
        return (std::log10(std::max(r, kLogFloor)) - std::log10(kLogFloor)) / -std::log10(kLogFloor);
    };
    auto px = [&](double r) { return kMargin + axis(r) * pw; };
    auto py = [&](double r) { return options.height - kMargin - axis(r) * ph; };

    static const std::map<ImageClass, const char*> colors{
        {ImageClass::Composite, "#1b9e77"}, {ImageClass::Print, "#d95f02"}, {ImageClass::Screen, "#7570b3"}};

    std::ostringstream svg;
    svg.precision(6);
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
        << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    const std::vector<double> ticks = options.log_axes ? std::vector<double>{1e-4, 1e-3, 1e-2, 1e-1, 1.0}
                                                       : std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0};
    for (double t : ticks) {
        svg << "<line x1=\"" << px(t) << "\" y1=\"" << py(0) << "\" x2=\"" << px(t) << "\" y2=\"" << py(0) + 5
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px(t) << "\" y=\"" << py(0) + 20 << "\" font-size=\"11\" text-anchor=\"middle\">" << t
            << "</text>\n"
            << "<line x1=\"" << px(0) - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << px(0) << "\" y2=\"" << py(t)
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px(0) - 8 << "\" y=\"" << py(t) + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << t
            << "</text>\n";
    }
    svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
        << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n"
        << "<text x=\"" << options.width / 2 << "\" y=\"" << options.height - 15
        << "\" font-size=\"13\" text-anchor=\"middle\">APCER</text>\n"
        << "<text x=\"18\" y=\"" << options.height / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << options.height / 2 << ")\">BPCER</text>\n";

    int legend = 0;
    for (auto s : curve.species) {
        svg << "<polyline fill=\"none\" stroke=\"" << colors.at(s) << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : curve.points) svg << px(p.apcer.at(s)) << ',' << py(p.bpcer) << ' ';
        svg << "\"/>\n";
        const int ly = kMargin + 15 + 18 * legend++;
        svg << "<line x1=\"" << options.width - kMargin - 90 << "\" y1=\"" << ly << "\" x2=\""
            << options.width - kMargin - 70 << "\" y2=\"" << ly << "\" stroke=\"" << colors.at(s)
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << options.width - kMargin - 64 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
            << data::to_string(s) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<ScoreRecord> parse_scores(std::istream& in, bool invert) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "score file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id,label,score") throw Error(ErrorKind::ParseError, "score header must be 'id,label,score'");

    std::vector<ScoreRecord> records;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto where = "line " + std::to_string(lineno) + ": ";
        const auto c2 = line.rfind(',');
        const auto c1 = c2 == std::string::npos || c2 == 0 ? std::string::npos : line.rfind(',', c2 - 1);
        if (c1 == std::string::npos) throw Error(ErrorKind::ParseError, where + "expected id,label,score");
        ScoreRecord r;
        r.id = line.substr(0, c1);
        try {
            r.label = data::parse_class(line.substr(c1 + 1, c2 - c1 - 1));
        } catch (const Error& e) {
            throw Error(ErrorKind::ParseError, where + e.what());
        }
        const std::string score = line.substr(c2 + 1);
        char* end = nullptr;
        r.score = std::strtod(score.c_str(), &end);
        if (score.empty() || end != score.c_str() + score.size() || !std::isfinite(r.score)) {
            throw Error(ErrorKind::ParseError, where + "score '" + score + "' is not a finite number");
        }
        if (invert) r.score = -r.score;
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path, bool invert) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    return parse_scores(in, invert);
}

}  // namespace idforge::pad
