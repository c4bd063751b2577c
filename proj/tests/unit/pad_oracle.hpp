#pragma once

// Reference PAD computations written directly from the rate definitions,
// sharing no code with the library.

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "idforge/pad.hpp"
#include "idforge/rng.hpp"

namespace idforge::testing {

struct OraclePoint {
    double threshold;
    std::map<data::ImageClass, double> apcer;
    double bpcer;
};

// literal = true rescans every record per threshold; otherwise counts come from
// binary search over per-label sorted scores.
inline std::vector<OraclePoint> oracle_curve(const std::vector<pad::ScoreRecord>& records, bool literal) {
    std::set<double> distinct;
    std::map<data::ImageClass, std::vector<double>> by_label;
    for (const auto& r : records) {
        distinct.insert(r.score);
        by_label[r.label].push_back(r.score);
    }
    for (auto& [_, v] : by_label) std::sort(v.begin(), v.end());
    std::vector<double> thresholds{-std::numeric_limits<double>::infinity()};
    thresholds.insert(thresholds.end(), distinct.begin(), distinct.end());
    thresholds.push_back(std::numeric_limits<double>::infinity());

    auto flagged = [&](data::ImageClass label, double t) -> std::size_t {
        const auto& v = by_label[label];
        if (!literal) return static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), t));
        std::size_t n = 0;
        for (const auto& r : records)
            if (r.label == label && r.score >= t) ++n;
        return n;
    };

    std::vector<OraclePoint> out;
    for (double t : thresholds) {
        OraclePoint p{t, {}, 0.0};
        for (const auto& [label, v] : by_label) {
            const double n = static_cast<double>(v.size());
            if (label == data::ImageClass::Bonafide) {
                p.bpcer = static_cast<double>(flagged(label, t)) / n;
            } else {
                p.apcer[label] = static_cast<double>(v.size() - flagged(label, t)) / n;
            }
        }
        out.push_back(p);
    }
    return out;
}

// First crossing of the (APCER, BPCER) polyline with the diagonal.
inline double oracle_eer(const std::vector<OraclePoint>& pts, data::ImageClass s) {
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double x0 = pts[k].apcer.at(s), y0 = pts[k].bpcer;
        const double x1 = pts[k + 1].apcer.at(s), y1 = pts[k + 1].bpcer;
        if (x0 == y0) return x0;
        if (x0 < y0 && x1 >= y1) {
            const double t = (y0 - x0) / ((x1 - x0) - (y1 - y0));
            return x0 + t * (x1 - x0);
        }
    }
    return pts.back().apcer.at(s);
}

// Highest threshold whose APCER meets the target, then linear interpolation
// towards the next threshold.
inline double oracle_bpcer_ap(const std::vector<OraclePoint>& pts, data::ImageClass s, double ap) {
    const double target = 1.0 / ap;
    double best_t = std::numeric_limits<double>::quiet_NaN();
    for (const auto& p : pts)
        if (p.apcer.at(s) <= target && !(p.threshold <= best_t)) best_t = p.threshold;
    std::size_t k = 0;
    while (pts[k].threshold != best_t) ++k;
    if (pts[k].apcer.at(s) == target || k + 1 == pts.size()) return pts[k].bpcer;
    const auto& a = pts[k];
    const auto& b = pts[k + 1];
    const double w = (target - a.apcer.at(s)) / (b.apcer.at(s) - a.apcer.at(s));
    return a.bpcer + w * (b.bpcer - a.bpcer);
}

// Random score sets: every label present, scores quantised so that ties occur.
inline std::vector<pad::ScoreRecord> random_scores(Rng& rng, std::size_t n) {
    std::vector<pad::ScoreRecord> out;
    const double grid = static_cast<double>(rng.uniform_int(5, 2000));
    const double shift = rng.uniform(0.0, 0.6);
    for (std::size_t i = 0; i < n; ++i) {
        const auto label = i < 4 ? static_cast<data::ImageClass>(i) : static_cast<data::ImageClass>(rng.uniform_int(0, 3));
        const double centre = label == data::ImageClass::Bonafide ? 0.0 : shift * (1.0 + static_cast<double>(label));
        const double s = std::round((centre + rng.uniform()) * grid) / grid;
        out.push_back({"r" + std::to_string(i), label, s});
    }
    return out;
}

}  // namespace idforge::testing
