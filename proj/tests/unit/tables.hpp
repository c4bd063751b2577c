#pragma once

#include <cstdio>
#include <string>

#include "idforge/dataset.hpp"

namespace idforge::testing {

using data::ImageClass;
using data::Origin;
using data::Split;

inline data::Manifest rows_of(const std::string& prefix, ImageClass c, Origin o, Split s, std::size_t n) {
    data::Manifest out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%06zu.png", i);
        out.push_back({prefix + "/" + std::string(data::to_string(c)) + "/" + std::string(data::to_string(s)) + "/" + buf,
                       c, o, s, std::nullopt});
    }
    return out;
}

inline void append(data::Manifest& dst, const data::Manifest& src) { dst.insert(dst.end(), src.begin(), src.end()); }

// Captured card partitions: {test, train, val} per class.
inline data::Manifest captured_partitions() {
    struct Counts {
        ImageClass c;
        std::size_t test, train, val;
    };
    const Counts table[] = {{ImageClass::Bonafide, 1842, 5613, 1831},
                            {ImageClass::Composite, 1762, 6251, 2067},
                            {ImageClass::Print, 2322, 6893, 2299},
                            {ImageClass::Screen, 1538, 4542, 1517}};
    data::Manifest m;
    for (const auto& t : table) {
        append(m, rows_of("chl", t.c, Origin::Captured, Split::Test, t.test));
        append(m, rows_of("chl", t.c, Origin::Captured, Split::Train, t.train));
        append(m, rows_of("chl", t.c, Origin::Captured, Split::Val, t.val));
    }
    return m;
}

// Named training subsets: Chl-A/B halve the captured train split, Chl-C clones
// the Chl-B bona fide rows, the synthetic sets are generated per class.
inline data::ManifestStore training_store(std::uint64_t seed = 7) {
    data::ManifestStore store;
    auto [a, b] = data::halve(captured_partitions(), Split::Train, seed);
    store["chl-a"] = std::move(a);
    store["chl-b"] = std::move(b);
    store["chl-c"] = data::clone(store["chl-b"], {ImageClass::Bonafide});

    auto& sgan = store["stylegan2"];
    auto& templ = store["templates"];
    for (ImageClass c : {ImageClass::Bonafide, ImageClass::Composite, ImageClass::Print, ImageClass::Screen}) {
        append(sgan, rows_of("sgan2", c, Origin::StyleGan2, Split::Train, 3000));
        append(templ, rows_of("templ", c, Origin::Templates, Split::Train, 3104));
    }
    for (ImageClass c : {ImageClass::Print, ImageClass::Screen}) {
        append(store["cyclegan"], rows_of("cgan", c, Origin::CycleGan, Split::Train, 2806));
        append(store["textures"], rows_of("text", c, Origin::Textures, Split::Train, 2806));
    }
    return store;
}

}  // namespace idforge::testing
