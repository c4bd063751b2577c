#include "idforge/qr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "idforge/error.hpp"

namespace idforge::qr {

namespace {

// ---------------------------------------------------------------- GF(256)

struct Galois {
    std::array<std::uint8_t, 512> exp{};
    std::array<int, 256> log{};

    Galois() {
        int x = 1;
        for (int i = 0; i < 255; ++i) {
            exp[i] = static_cast<std::uint8_t>(x);
            log[x] = i;
            x <<= 1;
            if (x & 0x100) x ^= 0x11D;
        }
        for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    }

    std::uint8_t mul(std::uint8_t a, std::uint8_t b) const {
        if (a == 0 || b == 0) return 0;
        return exp[log[a] + log[b]];
    }
    std::uint8_t div(std::uint8_t a, std::uint8_t b) const {
        if (a == 0) return 0;
        return exp[(log[a] + 255 - log[b]) % 255];
    }
    std::uint8_t pow_alpha(int e) const { return exp[((e % 255) + 255) % 255]; }
};

const Galois& gf() {
    static const Galois table;
    return table;
}

// ---------------------------------------------------------------- layout tables

struct BlockSpec {
    int data;
    int ecc;
};

// [version - 1][Ecc], one block each for versions 1 and 2.
constexpr std::array<std::array<BlockSpec, 4>, 2> kBlocks{{
    {{{19, 7}, {16, 10}, {13, 13}, {9, 17}}},
    {{{34, 10}, {28, 16}, {22, 22}, {16, 28}}},
}};

constexpr int kMaxVersion = 2;

int ecc_format_bits(Ecc e) {
    switch (e) {
        case Ecc::L: return 1;
        case Ecc::M: return 0;
        case Ecc::Q: return 3;
        case Ecc::H: return 2;
    }
    return 0;
}

Ecc ecc_from_format_bits(int bits) {
    switch (bits) {
        case 1: return Ecc::L;
        case 0: return Ecc::M;
        case 3: return Ecc::Q;
        default: return Ecc::H;
    }
}

int format_word(Ecc ecc, int mask) {
    const int data = (ecc_format_bits(ecc) << 3) | mask;
    int rem = data;
    for (int i = 0; i < 10; ++i) rem = (rem << 1) ^ ((rem >> 9) * 0x537);
    return ((data << 10) | rem) ^ 0x5412;
}

bool mask_bit(int mask, int row, int col) {
    switch (mask) {
        case 0: return (row + col) % 2 == 0;
        case 1: return row % 2 == 0;
        case 2: return col % 3 == 0;
        case 3: return (row + col) % 3 == 0;
        case 4: return (row / 2 + col / 3) % 2 == 0;
        case 5: return (row * col) % 2 + (row * col) % 3 == 0;
        case 6: return ((row * col) % 2 + (row * col) % 3) % 2 == 0;
        default: return ((row + col) % 2 + (row * col) % 3) % 2 == 0;
    }
}

// Module grid with a parallel "function pattern" flag per module.
struct Grid {
    int size;
    std::vector<std::uint8_t> dark;
    std::vector<std::uint8_t> function;

    explicit Grid(int version)
        : size(17 + 4 * version),
          dark(static_cast<std::size_t>(size) * size, 0),
          function(static_cast<std::size_t>(size) * size, 0) {
        for (auto [r, c] : {std::pair{0, 0}, std::pair{0, size - 7}, std::pair{size - 7, 0}}) place_finder(r, c);
        for (int i = 8; i < size - 8; ++i) {
            set_function(6, i, i % 2 == 0);
            set_function(i, 6, i % 2 == 0);
        }
        if (version == 2) place_alignment(18, 18);
        // Format areas are reserved here and written later.
        for (int i = 0; i < 9; ++i) {
            reserve(8, i);
            reserve(i, 8);
        }
        for (int i = 0; i < 8; ++i) {
            reserve(8, size - 1 - i);
            reserve(size - 1 - i, 8);
        }
        set_function(size - 8, 8, true);  // dark module
    }

    std::size_t idx(int row, int col) const { return static_cast<std::size_t>(row) * size + col; }
    bool is_function(int row, int col) const { return function[idx(row, col)] != 0; }
    void set_function(int row, int col, bool d) {
        dark[idx(row, col)] = d;
        function[idx(row, col)] = 1;
    }
    void reserve(int row, int col) { function[idx(row, col)] = 1; }

    void place_finder(int top, int left) {
        for (int dr = -1; dr <= 7; ++dr) {
            for (int dc = -1; dc <= 7; ++dc) {
                const int r = top + dr, c = left + dc;
                if (r < 0 || c < 0 || r >= size || c >= size) continue;
                const int ring = std::max(std::abs(dr - 3), std::abs(dc - 3));
                set_function(r, c, ring != 2 && ring != 4);
            }
        }
    }

    void place_alignment(int cr, int cc) {
        for (int dr = -2; dr <= 2; ++dr)
            for (int dc = -2; dc <= 2; ++dc) set_function(cr + dr, cc + dc, std::max(std::abs(dr), std::abs(dc)) != 1);
    }

    void write_format(int word) {
        auto bit = [&](int i) { return ((word >> i) & 1) != 0; };
        for (int i = 0; i <= 5; ++i) set_function(i, 8, bit(i));
        set_function(7, 8, bit(6));
        set_function(8, 8, bit(7));
        set_function(8, 7, bit(8));
        for (int i = 9; i < 15; ++i) set_function(8, 14 - i, bit(i));
        for (int i = 0; i < 8; ++i) set_function(8, size - 1 - i, bit(i));
        for (int i = 8; i < 15; ++i) set_function(size - 15 + i, 8, bit(i));
        set_function(size - 8, 8, true);
    }

    // Data module coordinates in placement order (the two-column zigzag).
    std::vector<std::pair<int, int>> data_order() const {
        std::vector<std::pair<int, int>> order;
        for (int right = size - 1; right >= 1; right -= 2) {
            if (right == 6) right = 5;
            const bool upward = ((right + 1) & 2) == 0;
            for (int vert = 0; vert < size; ++vert) {
                const int row = upward ? size - 1 - vert : vert;
                for (int j = 0; j < 2; ++j) {
                    const int col = right - j;
                    if (!is_function(row, col)) order.emplace_back(row, col);
                }
            }
        }
        return order;
    }
};

std::vector<std::uint8_t> rs_generator(int degree) {
    // Coefficients highest power first, leading 1 implied and dropped.
    std::vector<std::uint8_t> g(static_cast<std::size_t>(degree), 0);
    g.back() = 1;
    std::uint8_t root = 1;
    for (int i = 0; i < degree; ++i) {
        for (int j = 0; j < degree; ++j) {
            g[j] = gf().mul(g[j], root);
            if (j + 1 < degree) g[j] ^= g[j + 1];
        }
        root = gf().mul(root, 2);
    }
    return g;
}

std::vector<std::uint8_t> rs_remainder(const std::vector<std::uint8_t>& data, int degree) {
    const auto gen = rs_generator(degree);
    std::vector<std::uint8_t> rem(static_cast<std::size_t>(degree), 0);
    for (std::uint8_t b : data) {
        const std::uint8_t factor = b ^ rem.front();
        rem.erase(rem.begin());
        rem.push_back(0);
        for (int i = 0; i < degree; ++i) rem[i] ^= gf().mul(gen[i], factor);
    }
    return rem;
}

int penalty(const Grid& g) {
    const int n = g.size;
    auto d = [&](int r, int c) { return g.dark[g.idx(r, c)] != 0; };
    int score = 0;
    for (int pass = 0; pass < 2; ++pass) {
        for (int a = 0; a < n; ++a) {
            int run = 1;
            for (int b = 1; b <= n; ++b) {
                const bool same = b < n && (pass == 0 ? d(a, b) == d(a, b - 1) : d(b, a) == d(b - 1, a));
                if (same) {
                    ++run;
                } else {
                    if (run >= 5) score += 3 + (run - 5);
                    run = 1;
                }
            }
            // 1:1:3:1:1 with four light modules on one side.
            for (int b = 0; b + 11 <= n; ++b) {
                static constexpr std::array<bool, 11> p1{1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0};
                bool m1 = true, m2 = true;
                for (int k = 0; k < 11; ++k) {
                    const bool v = pass == 0 ? d(a, b + k) : d(b + k, a);
                    m1 &= v == p1[k];
                    m2 &= v == p1[10 - k];
                }
                score += 40 * (static_cast<int>(m1) + static_cast<int>(m2));
            }
        }
    }
    int dark = 0;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            dark += d(r, c);
            if (r + 1 < n && c + 1 < n && d(r, c) == d(r + 1, c) && d(r, c) == d(r, c + 1) && d(r, c) == d(r + 1, c + 1))
                score += 3;
        }
    }
    const int total = n * n;
    score += 10 * (std::abs(dark * 20 - total * 10) / total);
    return score;
}

}  // namespace

Code::Code(int version, Ecc ecc, int mask, std::vector<std::uint8_t> modules)
    : version_(version), ecc_(ecc), mask_(mask), modules_(std::move(modules)) {}

Code encode(std::string_view payload, Ecc ecc) {
    const int ecc_idx = static_cast<int>(ecc);
    int version = 0;
    for (int v = 1; v <= kMaxVersion; ++v) {
        if (4 + 8 + 8 * static_cast<int>(payload.size()) <= kBlocks[v - 1][ecc_idx].data * 8) {
            version = v;
            break;
        }
    }
    if (version == 0) {
        throw Error(ErrorKind::InvalidArgument, "QR payload of " + std::to_string(payload.size()) + " bytes is too long");
    }
    const BlockSpec spec = kBlocks[version - 1][ecc_idx];

    std::vector<bool> bits;
    auto push = [&](unsigned value, int count) {
        for (int i = count - 1; i >= 0; --i) bits.push_back(((value >> i) & 1) != 0);
    };
    push(0b0100, 4);
    push(static_cast<unsigned>(payload.size()), 8);
    for (char ch : payload) push(static_cast<unsigned char>(ch), 8);
    const int capacity = spec.data * 8;
    push(0, std::min(4, capacity - static_cast<int>(bits.size())));
    while (bits.size() % 8 != 0) bits.push_back(false);

    std::vector<std::uint8_t> codewords;
    for (std::size_t i = 0; i < bits.size(); i += 8) {
        std::uint8_t b = 0;
        for (int k = 0; k < 8; ++k) b = static_cast<std::uint8_t>((b << 1) | bits[i + k]);
        codewords.push_back(b);
    }
    for (std::uint8_t pad = 0xEC; static_cast<int>(codewords.size()) < spec.data; pad ^= 0xEC ^ 0x11)
        codewords.push_back(pad);
    const auto ecc_words = rs_remainder(codewords, spec.ecc);
    codewords.insert(codewords.end(), ecc_words.begin(), ecc_words.end());

    Grid base(version);
    const auto order = base.data_order();
    for (std::size_t i = 0; i < order.size(); ++i) {
        const bool bit = i < codewords.size() * 8 && ((codewords[i / 8] >> (7 - i % 8)) & 1) != 0;
        base.dark[base.idx(order[i].first, order[i].second)] = bit;
    }

    int best_mask = 0;
    int best_score = 0;
    std::vector<std::uint8_t> best;
    for (int mask = 0; mask < 8; ++mask) {
        Grid g = base;
        for (auto [r, c] : order) g.dark[g.idx(r, c)] ^= mask_bit(mask, r, c);
        g.write_format(format_word(ecc, mask));
        const int s = penalty(g);
        if (best.empty() || s < best_score) {
            best_score = s;
            best_mask = mask;
            best = g.dark;
        }
    }
    return Code(version, ecc, best_mask, std::move(best));
}

ImageBuffer render(const Code& code, int module_px, int quiet_zone) {
    const int n = code.size();
    const int side = (n + 2 * quiet_zone) * module_px;
    ImageBuffer img(side, side, Rgb{255, 255, 255});
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (!code.dark(c, r)) continue;
            for (int y = 0; y < module_px; ++y)
                for (int x = 0; x < module_px; ++x)
                    img.set((c + quiet_zone) * module_px + x, (r + quiet_zone) * module_px + y, kBlack);
        }
    }
    return img;
}

// ====================================================================== decoding

namespace {

struct Finder {
    double x;
    double y;
    double module;
    int hits;
};

class Binary {
public:
    Binary(const ImageBuffer& img, int threshold) : w_(img.width()), h_(img.height()), dark_(img.pixel_count()) {
        for (int y = 0; y < h_; ++y) {
            const auto* p = img.row(y);
            for (int x = 0; x < w_; ++x, p += 3) {
                const int lum = (299 * p[0] + 587 * p[1] + 114 * p[2]) / 1000;
                dark_[static_cast<std::size_t>(y) * w_ + x] = lum < threshold;
            }
        }
    }
    int width() const { return w_; }
    int height() const { return h_; }
    bool dark(int x, int y) const { return dark_[static_cast<std::size_t>(y) * w_ + x] != 0; }

private:
    int w_;
    int h_;
    std::vector<std::uint8_t> dark_;
};

int otsu_threshold(const ImageBuffer& img) {
    std::array<double, 256> hist{};
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const auto* p = img.data().data() + 3 * i;
        hist[(299 * p[0] + 587 * p[1] + 114 * p[2]) / 1000] += 1;
    }
    const double total = static_cast<double>(img.pixel_count());
    double sum = 0;
    for (int i = 0; i < 256; ++i) sum += i * hist[i];
    double sum_b = 0, w_b = 0, best = -1;
    int threshold = 128;
    for (int t = 0; t < 256; ++t) {
        w_b += hist[t];
        if (w_b == 0) continue;
        const double w_f = total - w_b;
        if (w_f == 0) break;
        sum_b += t * hist[t];
        const double m_b = sum_b / w_b, m_f = (sum - sum_b) / w_f;
        const double between = w_b * w_f * (m_b - m_f) * (m_b - m_f);
        if (between > best) {
            best = between;
            threshold = t + 1;
        }
    }
    return threshold;
}

bool ratios_ok(const std::array<int, 5>& runs) {
    int total = 0;
    for (int r : runs) {
        if (r == 0) return false;
        total += r;
    }
    if (total < 7) return false;
    const double unit = total / 7.0;
    const double tol = unit * 0.5;
    return std::abs(runs[0] - unit) < tol && std::abs(runs[1] - unit) < tol && std::abs(runs[2] - 3 * unit) < 3 * tol &&
           std::abs(runs[3] - unit) < tol && std::abs(runs[4] - unit) < tol;
}

// Walks outwards from `center` along a line and checks for dark-light-DARK-light-dark.
// Returns (refined centre, total run length).
template <typename Dark>
std::optional<std::pair<double, int>> cross_check(int center, int limit, Dark dark) {
    if (!dark(center)) return std::nullopt;
    std::array<int, 5> runs{};
    int i = center;
    while (i >= 0 && dark(i)) ++runs[2], --i;
    while (i >= 0 && !dark(i)) ++runs[1], --i;
    while (i >= 0 && dark(i)) ++runs[0], --i;
    const int start_center = center - runs[2] + 1;
    i = center + 1;
    while (i < limit && dark(i)) ++runs[2], ++i;
    while (i < limit && !dark(i)) ++runs[3], ++i;
    while (i < limit && dark(i)) ++runs[4], ++i;
    if (!ratios_ok(runs)) return std::nullopt;
    const double mid = start_center + runs[2] / 2.0 - 0.5;
    int total = 0;
    for (int r : runs) total += r;
    return std::pair{mid, total};
}

std::vector<Finder> find_finders(const Binary& bin) {
    std::vector<Finder> found;
    const int w = bin.width(), h = bin.height();
    std::vector<std::pair<int, bool>> runs;  // (start, dark)
    for (int y = 0; y < h; ++y) {
        runs.clear();
        for (int x = 0; x < w; ++x) {
            const bool d = bin.dark(x, y);
            if (runs.empty() || runs.back().second != d) runs.emplace_back(x, d);
        }
        auto run_len = [&](std::size_t k) {
            const int end = k + 1 < runs.size() ? runs[k + 1].first : w;
            return end - runs[k].first;
        };
        for (std::size_t k = 0; k + 5 <= runs.size(); ++k) {
            if (!runs[k].second) continue;
            const std::array<int, 5> five{run_len(k), run_len(k + 1), run_len(k + 2), run_len(k + 3), run_len(k + 4)};
            if (!ratios_ok(five)) continue;
            const int cx = runs[k + 2].first + five[2] / 2;
            const auto vert = cross_check(y, h, [&](int i) { return bin.dark(cx, i); });
            if (!vert) continue;
            const int cy = static_cast<int>(std::lround(vert->first));
            const auto horiz = cross_check(cx, w, [&](int i) { return bin.dark(i, cy); });
            if (!horiz) continue;
            const double module = (vert->second + horiz->second) / 14.0;
            const double fx = horiz->first, fy = vert->first;

            bool merged = false;
            for (auto& f : found) {
                if (std::hypot(f.x - fx, f.y - fy) < 2.0 * std::max(module, f.module) &&
                    std::max(module, f.module) < 1.6 * std::min(module, f.module)) {
                    const double n = f.hits;
                    f.x = (f.x * n + fx) / (n + 1);
                    f.y = (f.y * n + fy) / (n + 1);
                    f.module = (f.module * n + module) / (n + 1);
                    ++f.hits;
                    merged = true;
                    break;
                }
            }
            if (!merged) found.push_back({fx, fy, module, 1});
        }
    }
    std::sort(found.begin(), found.end(), [](const Finder& a, const Finder& b) { return a.hits > b.hits; });
    if (found.size() > 8) found.resize(8);
    return found;
}

struct Corners {
    Finder tl, tr, bl;
};

std::optional<Corners> choose_triple(const std::vector<Finder>& f) {
    std::optional<Corners> best;
    double best_score = 1e18;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j)
            for (std::size_t k = j + 1; k < f.size(); ++k) {
                std::array<const Finder*, 3> p{&f[i], &f[j], &f[k]};
                const double mmax = std::max({p[0]->module, p[1]->module, p[2]->module});
                const double mmin = std::min({p[0]->module, p[1]->module, p[2]->module});
                if (mmax > 1.5 * mmin) continue;
                auto dist = [&](int a, int b) { return std::hypot(p[a]->x - p[b]->x, p[a]->y - p[b]->y); };
                // Corner vertex is opposite the longest side.
                const std::array<double, 3> opposite{dist(1, 2), dist(0, 2), dist(0, 1)};
                const int corner = static_cast<int>(std::max_element(opposite.begin(), opposite.end()) - opposite.begin());
                const int a = (corner + 1) % 3, b = (corner + 2) % 3;
                const double s1 = dist(corner, a), s2 = dist(corner, b), hyp = opposite[corner];
                const double side = (s1 + s2) / 2;
                if (side < 10 * mmin) continue;
                const double skew = std::abs(s1 - s2) / side + std::abs(hyp - std::sqrt(2.0) * side) / hyp;
                if (skew > 0.3) continue;
                const double score = skew - 0.001 * (p[0]->hits + p[1]->hits + p[2]->hits);
                if (score < best_score) {
                    best_score = score;
                    const Finder& tl = *p[corner];
                    const Finder& fa = *p[a];
                    const Finder& fb = *p[b];
                    const double cross = (fa.x - tl.x) * (fb.y - tl.y) - (fa.y - tl.y) * (fb.x - tl.x);
                    best = cross > 0 ? Corners{tl, fa, fb} : Corners{tl, fb, fa};
                }
            }
    return best;
}

std::optional<std::vector<std::uint8_t>> rs_correct(std::vector<std::uint8_t> word, int nsym) {
    const auto& g = gf();
    const int n = static_cast<int>(word.size());
    // Byte k holds the coefficient of x^(n-1-k).
    std::vector<std::uint8_t> synd(static_cast<std::size_t>(nsym));
    bool clean = true;
    for (int i = 0; i < nsym; ++i) {
        std::uint8_t acc = 0;
        const std::uint8_t a = g.pow_alpha(i);
        for (std::uint8_t c : word) acc = g.mul(acc, a) ^ c;
        synd[i] = acc;
        clean &= acc == 0;
    }
    if (clean) return word;

    // Berlekamp-Massey; polynomials lowest degree first.
    std::vector<std::uint8_t> lambda{1}, prev{1};
    int len = 0, shift = 1;
    std::uint8_t prev_disc = 1;
    for (int step = 0; step < nsym; ++step) {
        std::uint8_t disc = synd[step];
        for (int i = 1; i <= len && i < static_cast<int>(lambda.size()); ++i) disc ^= g.mul(lambda[i], synd[step - i]);
        if (disc == 0) {
            ++shift;
            continue;
        }
        const std::uint8_t coef = g.div(disc, prev_disc);
        std::vector<std::uint8_t> next = lambda;
        if (next.size() < prev.size() + shift) next.resize(prev.size() + shift, 0);
        for (std::size_t i = 0; i < prev.size(); ++i) next[i + shift] ^= g.mul(coef, prev[i]);
        if (2 * len <= step) {
            prev = lambda;
            len = step + 1 - len;
            prev_disc = disc;
            shift = 1;
        } else {
            ++shift;
        }
        lambda = std::move(next);
    }
    while (lambda.size() > 1 && lambda.back() == 0) lambda.pop_back();
    if (static_cast<int>(lambda.size()) - 1 != len || 2 * len > nsym) return std::nullopt;

    auto eval = [&](const std::vector<std::uint8_t>& poly, std::uint8_t x) {
        std::uint8_t acc = 0;
        for (std::size_t i = poly.size(); i-- > 0;) acc = g.mul(acc, x) ^ poly[i];
        return acc;
    };

    // Omega = S(x) * Lambda(x) mod x^nsym.
    std::vector<std::uint8_t> omega(static_cast<std::size_t>(nsym), 0);
    for (int i = 0; i < nsym; ++i)
        for (std::size_t j = 0; j < lambda.size() && i + static_cast<int>(j) < nsym; ++j)
            omega[i + j] ^= g.mul(synd[i], lambda[j]);
    std::vector<std::uint8_t> deriv(lambda.size() > 1 ? lambda.size() - 1 : 1, 0);
    for (std::size_t i = 1; i < lambda.size(); i += 2) deriv[i - 1] = lambda[i];

    int fixed = 0;
    for (int power = 0; power < n; ++power) {
        const std::uint8_t x_inv = g.pow_alpha(-power);
        if (eval(lambda, x_inv) != 0) continue;
        const std::uint8_t denom = eval(deriv, x_inv);
        if (denom == 0) return std::nullopt;
        const std::uint8_t magnitude = g.mul(g.pow_alpha(power), g.div(eval(omega, x_inv), denom));
        word[n - 1 - power] ^= magnitude;
        ++fixed;
    }
    if (fixed != len) return std::nullopt;
    for (int i = 0; i < nsym; ++i) {
        std::uint8_t acc = 0;
        const std::uint8_t a = g.pow_alpha(i);
        for (std::uint8_t c : word) acc = g.mul(acc, a) ^ c;
        if (acc != 0) return std::nullopt;
    }
    return word;
}

std::optional<std::string> read_grid(const std::vector<std::uint8_t>& dark, int version) {
    Grid layout(version);
    const int n = layout.size;
    auto at = [&](int r, int c) { return dark[static_cast<std::size_t>(r) * n + c] != 0; };

    int copy1 = 0, copy2 = 0;
    for (int i = 0; i <= 5; ++i) copy1 |= at(i, 8) << i;
    copy1 |= at(7, 8) << 6;
    copy1 |= at(8, 8) << 7;
    copy1 |= at(8, 7) << 8;
    for (int i = 9; i < 15; ++i) copy1 |= at(8, 14 - i) << i;
    for (int i = 0; i < 8; ++i) copy2 |= at(8, n - 1 - i) << i;
    for (int i = 8; i < 15; ++i) copy2 |= at(n - 15 + i, 8) << i;

    int best_fmt = -1, best_dist = 99;
    for (int fmt = 0; fmt < 32; ++fmt) {
        const int word = format_word(ecc_from_format_bits(fmt >> 3), fmt & 7);
        const int d = std::min(__builtin_popcount(word ^ copy1), __builtin_popcount(word ^ copy2));
        if (d < best_dist) {
            best_dist = d;
            best_fmt = fmt;
        }
    }
    if (best_dist > 3) return std::nullopt;
    const Ecc ecc = ecc_from_format_bits(best_fmt >> 3);
    const int mask = best_fmt & 7;
    const BlockSpec spec = kBlocks[version - 1][static_cast<int>(ecc)];

    const auto order = layout.data_order();
    std::vector<std::uint8_t> words(static_cast<std::size_t>(spec.data + spec.ecc), 0);
    for (std::size_t i = 0; i < words.size() * 8 && i < order.size(); ++i) {
        const auto [r, c] = order[i];
        const bool bit = at(r, c) ^ mask_bit(mask, r, c);
        words[i / 8] = static_cast<std::uint8_t>(words[i / 8] | (bit << (7 - i % 8)));
    }
    const auto corrected = rs_correct(words, spec.ecc);
    if (!corrected) return std::nullopt;

    const auto& data = *corrected;
    auto bit_at = [&](std::size_t i) { return (data[i / 8] >> (7 - i % 8)) & 1; };
    auto read = [&](std::size_t& pos, int count) {
        unsigned v = 0;
        for (int k = 0; k < count; ++k) v = (v << 1) | bit_at(pos++);
        return v;
    };
    std::size_t pos = 0;
    if (read(pos, 4) != 0b0100) return std::nullopt;
    const unsigned length = read(pos, 8);
    if (pos + 8 * length > static_cast<std::size_t>(spec.data) * 8) return std::nullopt;
    std::string out;
    for (unsigned k = 0; k < length; ++k) out.push_back(static_cast<char>(read(pos, 8)));
    return out;
}

std::optional<std::string> decode_with(const Binary& bin) {
    const auto finders = find_finders(bin);
    if (finders.size() < 3) return std::nullopt;
    const auto corners = choose_triple(finders);
    if (!corners) return std::nullopt;
    const auto& [tl, tr, bl] = *corners;
    const double module = (tl.module + tr.module + bl.module) / 3.0;
    const double span = (std::hypot(tr.x - tl.x, tr.y - tl.y) + std::hypot(bl.x - tl.x, bl.y - tl.y)) / 2.0;
    const int estimate = static_cast<int>(std::lround((span / module + 7 - 17) / 4.0));

    for (int version : {estimate, estimate - 1, estimate + 1}) {
        if (version < 1 || version > kMaxVersion) continue;
        const int n = 17 + 4 * version;
        const double ux = (tr.x - tl.x) / (n - 7), uy = (tr.y - tl.y) / (n - 7);
        const double vx = (bl.x - tl.x) / (n - 7), vy = (bl.y - tl.y) / (n - 7);
        const double step = std::hypot(ux, uy);
        const int reach = step >= 3 ? 1 : 0;

        std::vector<std::uint8_t> dark(static_cast<std::size_t>(n) * n, 0);
        bool inside = true;
        for (int r = 0; r < n && inside; ++r) {
            for (int c = 0; c < n; ++c) {
                const double px = tl.x + (c - 3) * ux + (r - 3) * vx;
                const double py = tl.y + (c - 3) * uy + (r - 3) * vy;
                const int ix = static_cast<int>(std::lround(px));
                const int iy = static_cast<int>(std::lround(py));
                int votes = 0, seen = 0;
                for (int dy = -reach; dy <= reach; ++dy)
                    for (int dx = -reach; dx <= reach; ++dx) {
                        const int x = ix + dx, y = iy + dy;
                        if (x < 0 || y < 0 || x >= bin.width() || y >= bin.height()) continue;
                        ++seen;
                        votes += bin.dark(x, y);
                    }
                if (seen == 0) {
                    inside = false;
                    break;
                }
                dark[static_cast<std::size_t>(r) * n + c] = 2 * votes > seen;
            }
        }
        if (!inside) continue;
        if (auto text = read_grid(dark, version)) return text;
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::string> decode(const ImageBuffer& img) {
    const int otsu = otsu_threshold(img);
    std::vector<int> thresholds{otsu, 128, 80, 180};
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (std::find(thresholds.begin(), thresholds.begin() + static_cast<std::ptrdiff_t>(i), thresholds[i]) !=
            thresholds.begin() + static_cast<std::ptrdiff_t>(i))
            continue;
        if (auto text = decode_with(Binary(img, thresholds[i]))) return text;
    }
    return std::nullopt;
}

}  // namespace idforge::qr
